#include "regvar/oracle.hpp"

#include <cmath>
#include <limits>

namespace regvar {

namespace {

/// Neumaier-compensated long double accumulator.
class CompensatedSum {
public:
    void add(long double v) {
        const long double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            carry_ += (sum_ - t) + v;
        else
            carry_ += (v - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] long double value() const { return sum_ + carry_; }

private:
    long double sum_ = 0.0L;
    long double carry_ = 0.0L;
};

long double factorial(std::size_t n) {
    long double f = 1.0L;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<long double>(i);
    return f;
}

std::size_t partition_count(std::size_t m, std::size_t n) {
    // sum_d C(m,d) C(n,d) d!, saturating
    long double total = 0.0L;
    for (std::size_t d = 0; d <= std::min(m, n); ++d)
        total += factorial(m) / (factorial(d) * factorial(m - d)) * factorial(n) / factorial(n - d);
    return total > 1e18L ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

// Per-point tables shared by the likelihood evaluations of one update.
struct Tables {
    std::size_t m = 0;
    std::vector<long double> detect;  // detect[s * m + j] = p_d(x_s) L(z_j | x_s)
    std::vector<long double> missed;  // 1 - p_d(x_s)
    std::vector<long double> clutter; // c(z_j)
    std::vector<long double> clutter_count;  // k! rho_c(k), k = 0..m
};

Tables make_tables(std::span<const State> points, std::span<const Measurement> zs, const ObservationModel& model) {
    Tables t;
    t.m = zs.size();
    t.detect.resize(points.size() * t.m);
    t.missed.resize(points.size());
    for (std::size_t s = 0; s < points.size(); ++s) {
        const double pd = model.detection_probability(points[s]);
        t.missed[s] = 1.0L - static_cast<long double>(pd);
        for (std::size_t j = 0; j < t.m; ++j)
            t.detect[s * t.m + j] = static_cast<long double>(pd) * model.likelihood(zs[j], points[s]);
    }
    t.clutter.resize(t.m);
    for (std::size_t j = 0; j < t.m; ++j) t.clutter[j] = model.clutter_density(zs[j]);
    t.clutter_count.resize(t.m + 1);
    for (std::size_t k = 0; k <= t.m; ++k)
        t.clutter_count[k] = factorial(k) * static_cast<long double>(model.clutter_cardinality(k));
    return t;
}

// Likelihood of the ordered configuration `targets` (point indices).
long double tuple_likelihood(const Tables& t, std::span<const std::size_t> targets) {
    CompensatedSum sum;
    for_each_partition(t.m, targets.size(), [&](const AssociationPartition& p) {
        const std::size_t k = p.num_clutter();
        long double term = t.clutter_count[k];
        if (term == 0.0L) return;
        for (std::size_t j = 0; j < t.m; ++j) {
            const int a = p.measurement_to_target[j];
            term *= a == AssociationPartition::kClutter ? t.clutter[j] : t.detect[targets[a] * t.m + j];
        }
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (!p.target_detected[i]) term *= t.missed[targets[i]];
        sum.add(term);
    });
    return sum.value();
}

struct Accumulator {
    std::size_t S;
    CompensatedSum evidence;
    std::vector<CompensatedSum> mean;
    std::vector<CompensatedSum> second;
    std::vector<CompensatedSum> card;

    Accumulator(std::size_t points, std::size_t n_max) : S(points), mean(points), second(points * points), card(n_max + 1) {}

    void add(long double w, std::span<const std::size_t> counts, std::size_t n) {
        if (w == 0.0L) return;
        evidence.add(w);
        card[n].add(w);
        for (std::size_t s = 0; s < S; ++s) {
            if (counts[s] == 0) continue;
            mean[s].add(w * counts[s]);
            for (std::size_t r = 0; r < S; ++r)
                if (counts[r] != 0) second[s * S + r].add(w * counts[s] * counts[r]);
        }
    }

    ExactPosterior finish(std::span<const State> points, std::size_t configurations) const {
        const long double z = evidence.value();
        if (!(z > 0.0L)) throw DegenerateModel("measurement set has zero probability under the prior");
        ExactPosterior post;
        post.points.assign(points.begin(), points.end());
        post.evidence = static_cast<double>(z);
        post.configurations = configurations;
        post.point_mean.resize(S);
        for (std::size_t s = 0; s < S; ++s) post.point_mean[s] = static_cast<double>(mean[s].value() / z);
        post.point_second.resize(S * S);
        for (std::size_t i = 0; i < S * S; ++i) post.point_second[i] = static_cast<double>(second[i].value() / z);
        post.cardinality.resize(card.size());
        for (std::size_t n = 0; n < card.size(); ++n) post.cardinality[n] = static_cast<double>(card[n].value() / z);
        return post;
    }
};

std::size_t ordered_count(std::size_t S, std::size_t n_max) {
    long double total = 0.0L;
    long double p = 1.0L;
    for (std::size_t n = 0; n <= n_max; ++n) {
        total += p;
        p *= static_cast<long double>(S);
    }
    return total > 1e18L ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

std::size_t occupancy_count(std::size_t S, std::size_t n_max) {
    // C(n_max + S, S) count vectors with total <= n_max
    long double c = 1.0L;
    for (std::size_t i = 1; i <= S; ++i) c = c * static_cast<long double>(n_max + i) / static_cast<long double>(i);
    return c > 1e18L ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(std::llround(c));
}

ExactPosterior posterior_ordered(const DiscretePrior& prior, const Tables& t) {
    const std::size_t S = prior.points.size();
    const std::size_t n_max = prior.rho.n_max();
    Accumulator acc(S, n_max);
    std::size_t visited = 0;
    std::vector<std::size_t> tuple;
    std::vector<std::size_t> counts(S, 0);
    for (std::size_t n = 0; n <= n_max; ++n) {
        const long double rho_n = prior.rho(n);
        tuple.assign(n, 0);
        // odometer over points^n
        while (true) {
            ++visited;
            if (rho_n > 0.0L) {
                long double w = rho_n;
                std::fill(counts.begin(), counts.end(), 0);
                for (std::size_t s : tuple) {
                    w *= prior.spatial[s];
                    ++counts[s];
                }
                if (w > 0.0L) acc.add(w * tuple_likelihood(t, tuple), counts, n);
            }
            std::size_t pos = 0;
            while (pos < n && ++tuple[pos] == S) tuple[pos++] = 0;
            if (pos == n) break;
        }
    }
    return acc.finish(prior.points, visited);
}

ExactPosterior posterior_occupancy(const DiscretePrior& prior, const Tables& t) {
    const std::size_t S = prior.points.size();
    const std::size_t n_max = prior.rho.n_max();
    const std::size_t m = t.m;

    // Every map of measurements to {clutter, point 0..S-1}, with its
    // n-independent factor and the per-point number of measurements taken.
    struct Assignment {
        long double factor;
        std::vector<std::size_t> taken;
    };
    std::vector<Assignment> assignments;
    std::vector<std::size_t> choice(m, 0);  // 0 = clutter, s+1 = point s
    while (true) {
        Assignment a{1.0L, std::vector<std::size_t>(S, 0)};
        std::size_t clutter = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (choice[j] == 0) {
                ++clutter;
                a.factor *= t.clutter[j];
            } else {
                ++a.taken[choice[j] - 1];
                a.factor *= t.detect[(choice[j] - 1) * m + j];
            }
        }
        a.factor *= t.clutter_count[clutter];
        // assignments that take the same number of measurements at every point share the n-dependent part
        auto same = std::find_if(assignments.begin(), assignments.end(),
                                 [&](const Assignment& b) { return b.taken == a.taken; });
        if (a.factor != 0.0L) {
            if (same == assignments.end())
                assignments.push_back(std::move(a));
            else
                same->factor += a.factor;
        }
        std::size_t pos = 0;
        while (pos < m && ++choice[pos] == S + 1) choice[pos++] = 0;
        if (pos == m) break;
    }

    Accumulator acc(S, n_max);
    std::size_t visited = 0;
    std::vector<std::size_t> k(S, 0);
    std::vector<long double> log_spatial(S);
    for (std::size_t s = 0; s < S; ++s)
        log_spatial[s] = prior.spatial[s] > 0.0 ? std::log(static_cast<long double>(prior.spatial[s]))
                                                : -std::numeric_limits<long double>::infinity();
    // h[s][k][a] = k!/(k-a)! (1 - p_d(x_s))^(k-a): ordered picks of the a
    // detecting targets among the k at point s, the others missed (0^0 = 1)
    const std::size_t stride_k = m + 1;
    const std::size_t stride_s = (n_max + 1) * stride_k;
    std::vector<long double> h(S * stride_s, 0.0L);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t kk = 0; kk <= n_max; ++kk)
            for (std::size_t a = 0; a <= std::min(kk, m); ++a) {
                long double v = 1.0L;
                for (std::size_t i = 0; i < a; ++i) v *= static_cast<long double>(kk - i);
                for (std::size_t r = 0; r < kk - a; ++r) v *= t.missed[s];
                h[s * stride_s + kk * stride_k + a] = v;
            }

    // odometer over count vectors with sum <= n_max
    while (true) {
        ++visited;
        std::size_t n = 0;
        for (std::size_t s = 0; s < S; ++s) n += k[s];
        const long double rho_n = prior.rho(n);
        if (rho_n > 0.0L) {
            // rho(n) n! / prod k_s! prod spatial_s^k_s
            long double log_w = std::log(rho_n) + std::lgamma(static_cast<long double>(n) + 1.0L);
            bool possible = true;
            for (std::size_t s = 0; s < S; ++s) {
                if (k[s] == 0) continue;
                if (prior.spatial[s] <= 0.0) {
                    possible = false;
                    break;
                }
                log_w += static_cast<long double>(k[s]) * log_spatial[s] -
                         std::lgamma(static_cast<long double>(k[s]) + 1.0L);
            }
            if (possible) {
                // all terms are non-negative, so plain long double accumulation is exact enough
                long double like = 0.0L;
                for (const Assignment& a : assignments) {
                    long double term = a.factor;
                    for (std::size_t s = 0; s < S; ++s) {
                        if (a.taken[s] > k[s]) {
                            term = 0.0L;
                            break;
                        }
                        term *= h[s * stride_s + k[s] * stride_k + a.taken[s]];
                    }
                    like += term;
                }
                acc.add(std::exp(log_w) * like, k, n);
            }
        }
        std::size_t pos = 0;
        while (pos < S) {
            ++k[pos];
            std::size_t total = 0;
            for (std::size_t s = 0; s < S; ++s) total += k[s];
            if (total <= n_max) break;
            k[pos++] = 0;
        }
        if (pos == S) break;
    }
    return acc.finish(prior.points, visited);
}

} // namespace

void DiscretePrior::validate() const {
    if (points.empty()) throw InvalidInput("discrete prior needs at least one point");
    if (spatial.size() != points.size()) throw InvalidInput("spatial distribution must have one entry per point");
    double total = 0.0;
    for (double p : spatial) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("spatial probabilities must be finite and non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("spatial probabilities must sum to one");
}

WeightedParticleSet DiscretePrior::intensity() const {
    const double mass = rho.mean();
    std::vector<Particle> ps(points.size());
    for (std::size_t s = 0; s < points.size(); ++s) ps[s] = Particle{mass * spatial[s], points[s]};
    return WeightedParticleSet(std::move(ps));
}

std::size_t AssociationPartition::num_clutter() const {
    std::size_t k = 0;
    for (int a : measurement_to_target) k += a == kClutter ? 1 : 0;
    return k;
}

std::size_t for_each_partition(std::size_t m, std::size_t n,
                               const std::function<void(const AssociationPartition&)>& visit) {
    AssociationPartition p;
    p.measurement_to_target.assign(m, AssociationPartition::kClutter);
    p.target_detected.assign(n, false);
    std::size_t visited = 0;
    std::function<void(std::size_t)> assign = [&](std::size_t j) {
        if (j == m) {
            ++visited;
            visit(p);
            return;
        }
        p.measurement_to_target[j] = AssociationPartition::kClutter;
        assign(j + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (p.target_detected[i]) continue;
            p.target_detected[i] = true;
            p.measurement_to_target[j] = static_cast<int>(i);
            assign(j + 1);
            p.target_detected[i] = false;
        }
        p.measurement_to_target[j] = AssociationPartition::kClutter;
    };
    assign(0);
    return visited;
}

double likelihood_exact(std::span<const Measurement> measurements, const MultiTargetConfig& states,
                        const ObservationModel& model) {
    if (partition_count(measurements.size(), states.states.size()) > kOracleBudget)
        throw InvalidInput("association enumeration exceeds the oracle budget");
    const Tables t = make_tables(states.states, measurements, model);
    std::vector<std::size_t> identity(states.states.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    return static_cast<double>(tuple_likelihood(t, identity));
}

ExactPosterior posterior_exact(const DiscretePrior& prior, std::span<const Measurement> measurements,
                               const ObservationModel& model, OracleMode mode) {
    prior.validate();
    const std::size_t S = prior.points.size();
    const std::size_t n_max = prior.rho.n_max();
    const std::size_t m = measurements.size();
    const std::size_t ordered = ordered_count(S, n_max);
    const std::size_t occupancy = occupancy_count(S, n_max);
    if (mode == OracleMode::Auto) {
        // total work: configurations times associations per configuration
        long double ordered_work = 0.0L;
        long double tuples = 1.0L;
        for (std::size_t n = 0; n <= n_max; ++n, tuples *= static_cast<long double>(S))
            ordered_work += tuples * static_cast<long double>(partition_count(m, n));
        const long double occupancy_work =
            static_cast<long double>(occupancy) * std::pow(static_cast<long double>(S + 1), static_cast<long double>(m));
        const bool ordered_fits = ordered <= kOracleBudget && partition_count(m, n_max) <= kOracleBudget;
        mode = ordered_fits && ordered_work <= occupancy_work ? OracleMode::OrderedTuples : OracleMode::Occupancy;
    }

    if (mode == OracleMode::OrderedTuples) {
        if (ordered > kOracleBudget || partition_count(m, n_max) > kOracleBudget)
            throw InvalidInput("ordered-tuple enumeration exceeds the oracle budget");
    } else {
        long double assignments = std::pow(static_cast<long double>(S + 1), static_cast<long double>(m));
        if (occupancy > kOracleBudget || assignments > static_cast<long double>(kOracleBudget))
            throw InvalidInput("occupancy enumeration exceeds the oracle budget");
    }
    const Tables t = make_tables(prior.points, measurements, model);
    return mode == OracleMode::OrderedTuples ? posterior_ordered(prior, t) : posterior_occupancy(prior, t);
}

ExactMoments moments_exact(const ExactPosterior& post, const Region& a, const Region& b) {
    const std::size_t S = post.points.size();
    std::vector<bool> in_a(S);
    std::vector<bool> in_b(S);
    for (std::size_t s = 0; s < S; ++s) {
        in_a[s] = a.contains(post.points[s]);
        in_b[s] = b.contains(post.points[s]);
    }
    CompensatedSum mean_a;
    CompensatedSum second;
    CompensatedSum second_aa;
    for (std::size_t s = 0; s < S; ++s) {
        if (in_a[s]) mean_a.add(post.point_mean[s]);
        for (std::size_t r = 0; r < S; ++r) {
            if (in_a[s] && in_b[r]) second.add(post.point_second[s * S + r]);
            if (in_a[s] && in_a[r]) second_aa.add(post.point_second[s * S + r]);
        }
    }
    ExactMoments out;
    const long double mu = mean_a.value();
    out.mean = static_cast<double>(mu);
    out.second = static_cast<double>(second.value());
    out.variance = static_cast<double>(second_aa.value() - mu * mu);
    return out;
}

ExactMoments moments_exact(const ExactPosterior& posterior, const Region& a) {
    return moments_exact(posterior, a, a);
}

} // namespace regvar
