#include "regvar/cphd_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// c - a b given a b and the logs; exact zero handling when a or b vanishes.
double excess(double log_c, double log_a, double log_b, double ab) {
    if (log_a == kNegInf || log_b == kNegInf) return std::exp(log_c);
    return ab * std::expm1(log_c - (log_a + log_b));
}

} // namespace

std::vector<double> measurement_ratios(const ConditionalWeights& cw) {
    std::vector<double> ratios(cw.num_measurements());
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        if (!(cw.clutter_density[k] > 0.0))
            throw DegenerateModel("measurement lies outside the clutter support (c(z) = 0)");
        ratios[k] = cw.detected_mass[k] / cw.clutter_density[k];
    }
    return ratios;
}

CorrectorTerms cphd_correctors(const ConditionalWeights& cw, const CardinalityDistribution& rho,
                               const CardinalityDistribution& clutter) {
    if (!(cw.total_mass > 0.0)) throw DegenerateModel("predicted intensity has zero mass");
    const std::size_t m = cw.num_measurements();
    std::vector<double> eta = measurement_ratios(cw);
    const double top = eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end());
    const double scale = top > 0.0 ? top : 1.0;
    for (double& e : eta) e /= scale;
    const double log_scale = std::log(scale);

    const UpsilonInnerProducts inner(rho, cw.missed_mass, cw.total_mass, clutter, m);

    CorrectorTerms t;
    const EsfTable full = esf_all(eta);
    t.log_normalizer = inner.log_inner(0, full.values, log_scale);
    if (t.log_normalizer == kNegInf || !std::isfinite(t.log_normalizer))
        throw DegenerateModel("measurement set has zero probability under the model");
    const double log_norm = t.log_normalizer;

    t.log_l1_phi = inner.log_inner(1, full.values, log_scale) - log_norm;
    t.log_l2_phi = inner.log_inner(2, full.values, log_scale) - log_norm;
    t.l1_phi = std::exp(t.log_l1_phi);
    t.l2_phi = std::exp(t.log_l2_phi);
    t.phi_excess = excess(t.log_l2_phi, t.log_l1_phi, t.log_l1_phi, t.l1_phi * t.l1_phi);

    t.l1.resize(m);
    t.l2.resize(m);
    t.log_l1.resize(m);
    t.log_l2.resize(m);
    t.single_excess.resize(m);
    const double one = 1.0;
    esf_leave_one_out_each(eta, std::span<const double>(&one, 1), [&](std::size_t k, std::span<const double> table) {
        t.log_l1[k] = inner.log_inner(1, table, log_scale) - log_norm;
        t.log_l2[k] = inner.log_inner(2, table, log_scale) - log_norm;
        t.l1[k] = std::exp(t.log_l1[k]);
        t.l2[k] = std::exp(t.log_l2[k]);
        t.single_excess[k] = excess(t.log_l2[k], t.log_l1[k], t.log_l1_phi, t.l1[k] * t.l1_phi);
    });

    t.l2_pairs.assign(m * m, 0.0);
    t.log_l2_pairs.assign(m * m, kNegInf);
    t.pair_excesses.assign(m * m, 0.0);
    // Z \ {z_k, z_l} for l > k: ESF of the prefix z_{<k} times leave-one-out over z_{>k}.
    std::vector<double> prefix{1.0};
    EsfWorkspace workspace;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const std::span<const double> tail(eta.data() + k + 1, m - k - 1);
        esf_leave_one_out_each(tail, prefix, [&](std::size_t j, std::span<const double> table) {
            const std::size_t l = k + 1 + j;
            const double lp = inner.log_inner(2, table, log_scale) - log_norm;
            const double ex = excess(lp, t.log_l1[k], t.log_l1[l], t.l1[k] * t.l1[l]);
            t.log_l2_pairs[k * m + l] = t.log_l2_pairs[l * m + k] = lp;
            t.l2_pairs[k * m + l] = t.l2_pairs[l * m + k] = std::exp(lp);
            t.pair_excesses[k * m + l] = t.pair_excesses[l * m + k] = ex;
        }, workspace);
        esf_append(prefix, eta[k]);
    }
    return t;
}

CorrectorTerms cphd_correctors(const WeightedParticleSet& particles, const CardinalityDistribution& rho,
                               std::span<const Measurement> measurements, const ObservationModel& model) {
    return cphd_correctors(conditional_weights(particles, measurements, model), rho, model.clutter_cardinality);
}

UpsilonVector cphd_upsilon0(const ConditionalWeights& cw, const CardinalityDistribution& rho,
                            const CardinalityDistribution& clutter) {
    const std::vector<double> ratios = measurement_ratios(cw);
    UpsilonArgs args;
    args.mass_missed = cw.missed_mass;
    args.mass_total = cw.total_mass;
    args.ratios = ratios;
    args.clutter = &clutter;
    return upsilon_vector(0, args, rho.n_max());
}

CardinalityDistribution cphd_update_cardinality(const CardinalityDistribution& rho, const UpsilonVector& upsilon0) {
    if (upsilon0.size() != rho.n_max() + 1)
        throw InvalidInput("Upsilon vector and cardinality distribution span different n ranges");
    std::vector<double> logs(upsilon0.size());
    double top = kNegInf;
    for (std::size_t n = 0; n < logs.size(); ++n) {
        logs[n] = rho(n) > 0.0 ? upsilon0.log_values[n] + std::log(rho(n)) : kNegInf;
        top = std::max(top, logs[n]);
    }
    if (top == kNegInf || !std::isfinite(top))
        throw DegenerateModel("measurement set has zero probability under the model");
    std::vector<double> w(logs.size());
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = std::exp(logs[n] - top);
    return CardinalityDistribution(std::move(w));
}

WeightedParticleSet cphd_update_intensity(const ConditionalWeights& cw, const CorrectorTerms& correctors,
                                          const WeightedParticleSet& predicted) {
    const std::size_t J = cw.num_particles();
    const std::size_t m = cw.num_measurements();
    if (predicted.size() != J) throw InvalidInput("particle count differs from conditional weights");
    if (correctors.num_measurements() != m) throw InvalidInput("corrector terms built for another measurement set");

    std::vector<double> w(J);
    for (std::size_t i = 0; i < J; ++i) w[i] = cw.missed[i] * correctors.l1_phi;
    for (std::size_t k = 0; k < m; ++k) {
        if (!(cw.clutter_density[k] > 0.0))
            throw DegenerateModel("measurement lies outside the clutter support (c(z) = 0)");
        const double factor = correctors.l1[k] / cw.clutter_density[k];
        const auto col = cw.detected.col(k);
        for (std::size_t i = 0; i < J; ++i) w[i] += col[i] * factor;
    }
    std::vector<Particle> out(J);
    for (std::size_t i = 0; i < J; ++i) out[i] = Particle{w[i], predicted[i].state};
    return WeightedParticleSet(std::move(out));
}

RegionalStats cphd_regional_stats(const ConditionalWeights& cw, const CorrectorTerms& correctors,
                                  const WeightedParticleSet& updated, const Region& region) {
    const std::size_t J = cw.num_particles();
    const std::size_t m = cw.num_measurements();
    if (updated.size() != J) throw InvalidInput("particle count differs from conditional weights");
    if (correctors.num_measurements() != m) throw InvalidInput("corrector terms built for another measurement set");

    std::vector<std::size_t> inside;
    inside.reserve(J);
    for (std::size_t i = 0; i < J; ++i)
        if (region.contains(updated[i].state)) inside.push_back(i);

    double missed = 0.0;
    for (std::size_t i : inside) missed += cw.missed[i];

    // beta_k = mu^{z_k}(B) / c(z_k)
    std::vector<double> beta(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto col = cw.detected.col(k);
        double s = 0.0;
        for (std::size_t i : inside) s += col[i];
        beta[k] = s / cw.clutter_density[k];
    }

    RegionalStats out;
    out.label = region.label();
    out.mean = missed * correctors.l1_phi;
    for (std::size_t k = 0; k < m; ++k) out.mean += beta[k] * correctors.l1[k];

    double single = 0.0;
    double pairs = 0.0;
    double diagonal = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        if (beta[k] == 0.0) continue;
        single += beta[k] * correctors.single_excess[k];
        const double contribution = beta[k] * correctors.l1[k];
        diagonal += contribution * contribution;
        for (std::size_t l = k + 1; l < m; ++l)
            if (beta[l] != 0.0) pairs += beta[k] * beta[l] * correctors.pair_excess(k, l);
    }
    out.raw_variance = out.mean + missed * missed * correctors.phi_excess + 2.0 * missed * single +
                       2.0 * pairs - diagonal;
    out.variance = std::max(0.0, out.raw_variance);
    return out;
}

CphdUpdateResult cphd_update(const WeightedParticleSet& predicted, const CardinalityDistribution& rho,
                             std::span<const Measurement> measurements, const ObservationModel& model) {
    CphdUpdateResult r{conditional_weights(predicted, measurements, model), {}, {}, {}};
    r.correctors = cphd_correctors(r.weights, rho, model.clutter_cardinality);
    r.cardinality = cphd_update_cardinality(rho, cphd_upsilon0(r.weights, rho, model.clutter_cardinality));
    r.intensity = cphd_update_intensity(r.weights, r.correctors, predicted);
    return r;
}

} // namespace regvar
