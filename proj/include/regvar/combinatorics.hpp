#pragma once

#include "regvar/core_types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace regvar {

/// Elementary symmetric functions e_0..e_m of a set of m values.
struct EsfTable {
    std::vector<double> values;
};

/// e_d for d = 0..m via the Vieta recursion (one multiply-add pass per value).
/// Inputs must be finite and non-negative.
[[nodiscard]] EsfTable esf_all(std::span<const double> xi);

/// Appends one value to an existing table in place: e'_d = e_d + xi e_{d-1}.
void esf_append(std::vector<double>& esf, double xi);

/// Leave-one-out tables: result[k] = outside * prod_{j != k} (1 + xi_j t),
/// coefficient-wise, so with `outside` = {1} result[k] is the ESF table of
/// xi without xi_k. Divide and conquer over the index range; uses only sums
/// of non-negative products, so there is no cancellation.
[[nodiscard]] std::vector<std::vector<double>> esf_leave_one_out(std::span<const double> xi,
                                                                 std::span<const double> outside);
[[nodiscard]] std::vector<std::vector<double>> esf_leave_one_out(std::span<const double> xi);

/// Scratch buffers for esf_leave_one_out_each; one instance reused across
/// calls saves the per-call allocations.
struct EsfWorkspace {
    std::vector<std::vector<double>> levels;
};

/// Same tables, handed to `visit(k, table)` one at a time from the workspace
/// instead of being stored. The span is valid only during the call.
void esf_leave_one_out_each(std::span<const double> xi, std::span<const double> outside,
                            const std::function<void(std::size_t, std::span<const double>)>& visit,
                            EsfWorkspace& workspace);
void esf_leave_one_out_each(std::span<const double> xi, std::span<const double> outside,
                            const std::function<void(std::size_t, std::span<const double>)>& visit);

/// Upsilon^u[mu, Z](n) for n = 0..n_max, kept as natural logs (-inf for
/// zero) so that values many orders of magnitude apart survive together.
struct UpsilonVector {
    int order = 0;
    std::vector<double> log_values;

    [[nodiscard]] std::size_t size() const { return log_values.size(); }
    [[nodiscard]] double at(std::size_t n) const;
};

/// Inputs shared by every Upsilon evaluation of one update.
struct UpsilonArgs {
    double mass_missed = 0.0;           ///< missed-detection mass mu^phi(X)
    double mass_total = 0.0;            ///< predicted mass mu(X)
    std::span<const double> ratios;     ///< mu^z(X) / c(z) for z in Z
    const CardinalityDistribution* clutter = nullptr;  ///< rho_c
};

/// Upsilon^u[mu, Z](n) =
///   sum_{d=0}^{min(|Z|,n)} n! (|Z|-d)! / (n-(d+u))! rho_c(|Z|-d)
///                          mu^phi(X)^{n-(d+u)} / mu(X)^n e_d(Z),
/// terms with n < d+u dropped. Throws DegenerateModel when mass_total is zero.
[[nodiscard]] double upsilon(int u, const UpsilonArgs& args, std::size_t n);
[[nodiscard]] double log_upsilon(int u, const UpsilonArgs& args, std::size_t n);
[[nodiscard]] UpsilonVector upsilon_vector(int u, const UpsilonArgs& args, std::size_t n_max);

/// <Upsilon, rho> = sum_n Upsilon(n) rho(n). Throws InvalidInput when the
/// vector does not span 0..rho.n_max().
[[nodiscard]] double upsilon_inner(const UpsilonVector& uv, const CardinalityDistribution& rho);
[[nodiscard]] double log_upsilon_inner(const UpsilonVector& uv, const CardinalityDistribution& rho);

/// Evaluates log <Upsilon^u[mu, Z'], rho> for many subsets Z' of one
/// measurement set without going through n. Swapping the sums over n and d
/// leaves, for each k = d + u, the k-th derivative of the probability
/// generating function of rho at q = mu^phi(X)/mu(X); those are tabulated
/// once, so each subset costs O(|Z'|).
class UpsilonInnerProducts {
public:
    /// `max_subset` is the largest |Z'| that will be queried.
    UpsilonInnerProducts(const CardinalityDistribution& rho, double mass_missed, double mass_total,
                         const CardinalityDistribution& clutter, std::size_t max_subset);

    /// `scaled_esf[d] * exp(d * log_scale)` must equal e_d(Z'), with Z' made of
    /// the mu^z(X)/c(z) ratios; |Z'| = scaled_esf.size() - 1.
    [[nodiscard]] double log_inner(int u, std::span<const double> scaled_esf, double log_scale) const;

private:
    std::vector<double> log_pgf_derivative_;  // log G^{(k)}(q), k = 0..max_subset+2
    std::vector<double> log_clutter_term_;    // log(j! rho_c(j)), j = 0..max_subset
    double log_mass_ = 0.0;
};

/// log(sum exp(x_i)) with -inf entries ignored; -inf for an empty/all -inf input.
[[nodiscard]] double log_sum_exp(std::span<const double> x);

} // namespace regvar
