#include "regvar/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

const std::vector<double> kLogFactorials = [] {
    std::vector<double> t(4096);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
    return t;
}();

double log_factorial(std::size_t n) {
    return n < kLogFactorials.size() ? kLogFactorials[n] : std::lgamma(static_cast<double>(n) + 1.0);
}

// A linear sum of products of factors in [0, 1] at least this large cannot
// have lost anything relevant to underflow; smaller sums are redone in logs.
constexpr double kLinearFloor = 1e-280;

// out = exp(logs - shift) with shift = max(logs); -inf entries map to zero.
double exp_shifted(std::span<const double> logs, std::vector<double>& out) {
    double top = kNegInf;
    for (double v : logs) top = std::max(top, v);
    out.assign(logs.size(), 0.0);
    if (top == kNegInf) return 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) out[i] = std::exp(logs[i] - top);
    return top;
}

// ws[depth] holds the product for everything outside [lo, hi); children
// build theirs in ws[depth + 1], so no level is overwritten while in use.
void loo_recurse(std::span<const double> xi, std::size_t lo, std::size_t hi, std::size_t depth,
                 std::vector<std::vector<double>>& ws,
                 const std::function<void(std::size_t, std::span<const double>)>& visit) {
    const std::vector<double>& outside = ws[depth];
    if (hi - lo == 1) {
        visit(lo, outside);
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double>& next = ws[depth + 1];
    next.assign(outside.begin(), outside.end());
    for (std::size_t j = mid; j < hi; ++j) esf_append(next, xi[j]);
    loo_recurse(xi, lo, mid, depth + 1, ws, visit);
    next.assign(outside.begin(), outside.end());
    for (std::size_t j = lo; j < mid; ++j) esf_append(next, xi[j]);
    loo_recurse(xi, mid, hi, depth + 1, ws, visit);
}

// Scaled ESF of the ratios: e_d = values[d] * exp(d * log_scale).
struct ScaledEsf {
    std::vector<double> values;
    double log_scale = 0.0;
};

ScaledEsf scaled_esf(std::span<const double> ratios) {
    double top = 0.0;
    for (double r : ratios) top = std::max(top, r);
    const double scale = top > 0.0 ? top : 1.0;
    std::vector<double> eta(ratios.begin(), ratios.end());
    for (double& e : eta) e /= scale;
    return {esf_all(eta).values, std::log(scale)};
}

void check_args(int u, const UpsilonArgs& args) {
    if (u < 0 || u > 2) throw InvalidInput("Upsilon order must be 0, 1 or 2");
    if (!(args.mass_total > 0.0))
        throw DegenerateModel("Upsilon needs a predicted intensity with positive mass");
    if (!(args.mass_missed >= 0.0)) throw InvalidInput("missed-detection mass must be non-negative");
    if (args.clutter == nullptr) throw InvalidInput("Upsilon needs a clutter cardinality");
}

// n-independent part of each d term: log[(|Z|-d)! rho_c(|Z|-d) e_d]
std::vector<double> log_d_terms(const UpsilonArgs& args, const ScaledEsf& esf) {
    const std::size_t m = esf.values.size() - 1;
    std::vector<double> c(m + 1);
    for (std::size_t d = 0; d <= m; ++d) {
        const double rc = (*args.clutter)(m - d);
        c[d] = rc > 0.0 && esf.values[d] > 0.0
                   ? log_factorial(m - d) + std::log(rc) + std::log(esf.values[d]) + static_cast<double>(d) * esf.log_scale
                   : kNegInf;
    }
    return c;
}

double log_upsilon_scaled(int u, const UpsilonArgs& args, std::span<const double> d_terms, std::size_t n,
                          std::vector<double>& terms) {
    const std::size_t m = d_terms.size() - 1;
    const double log_missed = safe_log(args.mass_missed);
    const double log_total = std::log(args.mass_total);
    const std::size_t uu = static_cast<std::size_t>(u);
    terms.clear();
    for (std::size_t d = 0; d <= std::min(m, n); ++d) {
        if (n < d + uu) break;
        if (d_terms[d] == kNegInf) continue;
        const std::size_t power = n - d - uu;
        // 0^0 = 1 when the missed mass vanishes
        const double missed_term = power == 0 ? 0.0 : static_cast<double>(power) * log_missed;
        terms.push_back(log_factorial(n) - log_factorial(power) + missed_term - static_cast<double>(n) * log_total +
                        d_terms[d]);
    }
    return log_sum_exp(terms);
}

} // namespace

double log_sum_exp(std::span<const double> x) {
    double top = kNegInf;
    for (double v : x) top = std::max(top, v);
    if (top == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : x) s += std::exp(v - top);
    return top + std::log(s);
}

void esf_append(std::vector<double>& esf, double xi) {
    esf.push_back(0.0);
    for (std::size_t d = esf.size() - 1; d >= 1; --d) esf[d] += xi * esf[d - 1];
}

EsfTable esf_all(std::span<const double> xi) {
    EsfTable t;
    t.values.reserve(xi.size() + 1);
    t.values.push_back(1.0);
    for (double v : xi) {
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidInput("elementary symmetric functions need finite non-negative inputs");
        esf_append(t.values, v);
    }
    return t;
}

void esf_leave_one_out_each(std::span<const double> xi, std::span<const double> outside,
                            const std::function<void(std::size_t, std::span<const double>)>& visit,
                            EsfWorkspace& workspace) {
    if (xi.empty()) return;
    std::size_t depth = 1;
    for (std::size_t n = xi.size(); n > 1; n = (n + 1) / 2) ++depth;
    auto& ws = workspace.levels;
    if (ws.size() < depth + 1) ws.resize(depth + 1);
    for (auto& level : ws) level.reserve(outside.size() + xi.size());
    ws[0].assign(outside.begin(), outside.end());
    loo_recurse(xi, 0, xi.size(), 0, ws, visit);
}

void esf_leave_one_out_each(std::span<const double> xi, std::span<const double> outside,
                            const std::function<void(std::size_t, std::span<const double>)>& visit) {
    EsfWorkspace workspace;
    esf_leave_one_out_each(xi, outside, visit, workspace);
}

std::vector<std::vector<double>> esf_leave_one_out(std::span<const double> xi,
                                                   std::span<const double> outside) {
    std::vector<std::vector<double>> out(xi.size());
    esf_leave_one_out_each(xi, outside, [&](std::size_t k, std::span<const double> table) {
        out[k].assign(table.begin(), table.end());
    });
    return out;
}

std::vector<std::vector<double>> esf_leave_one_out(std::span<const double> xi) {
    const double one = 1.0;
    return esf_leave_one_out(xi, std::span<const double>(&one, 1));
}

double UpsilonVector::at(std::size_t n) const { return std::exp(log_values.at(n)); }

double log_upsilon(int u, const UpsilonArgs& args, std::size_t n) {
    check_args(u, args);
    std::vector<double> terms;
    return log_upsilon_scaled(u, args, log_d_terms(args, scaled_esf(args.ratios)), n, terms);
}

double upsilon(int u, const UpsilonArgs& args, std::size_t n) {
    return std::exp(log_upsilon(u, args, n));
}

UpsilonVector upsilon_vector(int u, const UpsilonArgs& args, std::size_t n_max) {
    check_args(u, args);
    const std::vector<double> d_terms = log_d_terms(args, scaled_esf(args.ratios));
    const std::size_t m = d_terms.size() - 1;
    const std::size_t uu = static_cast<std::size_t>(u);
    std::vector<double> logs(n_max + 1);
    std::vector<double> terms;
    if (args.mass_missed > 0.0) {
        // term(n, d) = n! q^n * [phi^-(d+u) d_term(d)] * [1 / (n-d-u)!] with q = phi / mu(X),
        // a convolution over d once both brackets are brought to a common scale.
        const double log_missed = std::log(args.mass_missed);
        const double log_q = log_missed - std::log(args.mass_total);
        std::vector<double> lx(m + 1);
        for (std::size_t d = 0; d <= m; ++d) lx[d] = d_terms[d] - static_cast<double>(d + uu) * log_missed;
        std::vector<double> ly(n_max + 1);
        for (std::size_t j = 0; j <= n_max; ++j) ly[j] = -log_factorial(j);
        std::vector<double> x;
        std::vector<double> y;
        const double shift = exp_shifted(lx, x) + exp_shifted(ly, y);
        for (std::size_t n = 0; n <= n_max; ++n) {
            double sum = 0.0;
            for (std::size_t d = 0; d <= m && d + uu <= n; ++d) sum += x[d] * y[n - d - uu];
            logs[n] = sum >= kLinearFloor
                          ? std::log(sum) + shift + log_factorial(n) + static_cast<double>(n) * log_q
                          : log_upsilon_scaled(u, args, d_terms, n, terms);
        }
    } else {
        for (std::size_t n = 0; n <= n_max; ++n) logs[n] = log_upsilon_scaled(u, args, d_terms, n, terms);
    }
    UpsilonVector uv;
    uv.order = u;
    uv.log_values = std::move(logs);
    return uv;
}

double log_upsilon_inner(const UpsilonVector& uv, const CardinalityDistribution& rho) {
    if (uv.size() != rho.n_max() + 1)
        throw InvalidInput("Upsilon vector and cardinality distribution span different n ranges");
    std::vector<double> terms(uv.size());
    for (std::size_t n = 0; n < terms.size(); ++n) terms[n] = uv.log_values[n] + safe_log(rho(n));
    return log_sum_exp(terms);
}

double upsilon_inner(const UpsilonVector& uv, const CardinalityDistribution& rho) {
    return std::exp(log_upsilon_inner(uv, rho));
}

UpsilonInnerProducts::UpsilonInnerProducts(const CardinalityDistribution& rho, double mass_missed,
                                           double mass_total, const CardinalityDistribution& clutter,
                                           std::size_t max_subset) {
    if (!(mass_total > 0.0))
        throw DegenerateModel("Upsilon needs a predicted intensity with positive mass");
    log_mass_ = std::log(mass_total);
    const double log_q = safe_log(mass_missed / mass_total);
    const std::size_t n_max = rho.n_max();

    // G^(k)(q) = sum_j [rho(k+j) (k+j)!] [q^j / j!]: a correlation of two
    // sequences, summed linearly at a common scale.
    std::vector<double> base(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) base[n] = safe_log(rho(n)) + log_factorial(n);
    std::vector<double> lq(n_max + 1, kNegInf);
    lq[0] = 0.0;
    if (log_q != kNegInf)
        for (std::size_t j = 1; j <= n_max; ++j) lq[j] = static_cast<double>(j) * log_q - log_factorial(j);
    std::vector<double> p;
    std::vector<double> qj;
    const double shift = exp_shifted(base, p) + exp_shifted(lq, qj);

    log_pgf_derivative_.assign(max_subset + 3, kNegInf);
    std::vector<double> terms;
    for (std::size_t k = 0; k < log_pgf_derivative_.size() && k <= n_max; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j + k <= n_max; ++j) sum += p[k + j] * qj[j];
        if (sum >= kLinearFloor) {
            log_pgf_derivative_[k] = std::log(sum) + shift;
            continue;
        }
        terms.clear();
        for (std::size_t n = k; n <= n_max; ++n) {
            if (base[n] == kNegInf) continue;
            const double q_term = n == k ? 0.0 : static_cast<double>(n - k) * log_q;
            terms.push_back(base[n] - log_factorial(n - k) + q_term);
        }
        log_pgf_derivative_[k] = log_sum_exp(terms);
    }

    log_clutter_term_.resize(max_subset + 1);
    for (std::size_t j = 0; j <= max_subset; ++j)
        log_clutter_term_[j] = log_factorial(j) + safe_log(clutter(j));
}

double UpsilonInnerProducts::log_inner(int u, std::span<const double> scaled_esf, double log_scale) const {
    if (scaled_esf.empty()) throw InvalidInput("ESF table must hold at least e_0");
    const std::size_t m = scaled_esf.size() - 1;
    if (m >= log_clutter_term_.size()) throw InvalidInput("subset larger than the tabulated maximum");
    const std::size_t uu = static_cast<std::size_t>(u);
    // d * log(scale / mass): e_d carries scale^d, Upsilon divides by mass^(d+u)
    const double log_step = log_scale - log_mass_;
    thread_local std::vector<double> terms;
    terms.resize(m + 1);
    for (std::size_t d = 0; d <= m; ++d) {
        const double e = scaled_esf[d];
        terms[d] = e > 0.0 ? log_clutter_term_[m - d] + static_cast<double>(d) * log_step + std::log(e) +
                                 log_pgf_derivative_[d + uu]
                           : kNegInf;
    }
    return log_sum_exp(terms) - static_cast<double>(u) * log_mass_;
}

} // namespace regvar
