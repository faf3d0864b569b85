#pragma once

#include "regvar/core_types.hpp"
#include "regvar/observation.hpp"
#include "regvar/region.hpp"

#include <functional>
#include <span>
#include <vector>

namespace regvar {

/// i.i.d. prior over a finite set of points: n ~ rho, each target drawn
/// independently from `spatial`.
struct DiscretePrior {
    std::vector<State> points;
    CardinalityDistribution rho;
    std::vector<double> spatial;

    /// Throws InvalidInput unless spatial matches points, is non-negative and sums to 1.
    void validate() const;
    /// Intensity of the prior, mean(rho) * spatial, as a particle set over `points`.
    [[nodiscard]] WeightedParticleSet intensity() const;
};

/// One data association: measurement j is produced by target
/// `measurement_to_target[j]`, or is clutter when that entry is kClutter.
/// Targets that produce no measurement are missed.
struct AssociationPartition {
    static constexpr int kClutter = -1;
    std::vector<int> measurement_to_target;
    std::vector<bool> target_detected;

    [[nodiscard]] std::size_t num_clutter() const;
};

/// Visits every association of m measurements with n targets (each target
/// explains at most one measurement); returns the number visited,
/// sum_d C(m, d) C(n, d) d!.
std::size_t for_each_partition(std::size_t m, std::size_t n,
                               const std::function<void(const AssociationPartition&)>& visit);

/// Largest number of configurations the oracle will enumerate.
inline constexpr std::size_t kOracleBudget = 10'000'000;

/// Multi-measurement multi-target likelihood by explicit enumeration:
///   sum_pi  k! rho_c(k) prod_clutter c(z) prod_assigned p_d L(z|x) prod_missed (1 - p_d),
/// k the number of clutter measurements. Throws InvalidInput when the
/// partition count exceeds the budget.
[[nodiscard]] double likelihood_exact(std::span<const Measurement> measurements, const MultiTargetConfig& states,
                                      const ObservationModel& model);

enum class OracleMode {
    Auto,           ///< ordered tuples when they fit the budget, else occupancy counts
    OrderedTuples,  ///< every x_{1:n} in points^n, likelihood by partition enumeration
    Occupancy,      ///< every count vector (k_1..k_S), multinomial prior weight
};

/// Exact posterior summarised by the per-point occupancy moments, which is
/// all the regional moments need.
struct ExactPosterior {
    std::vector<State> points;
    /// E[k_s | Z]
    std::vector<double> point_mean;
    /// E[k_s k_t | Z], S x S row-major
    std::vector<double> point_second;
    /// P(n | Z), n = 0..n_max
    std::vector<double> cardinality;
    /// p(Z), including the clutter spatial densities.
    double evidence = 0.0;
    std::size_t configurations = 0;
};

/// Throws InvalidInput when the configuration count exceeds the budget and
/// DegenerateModel when the evidence is zero.
[[nodiscard]] ExactPosterior posterior_exact(const DiscretePrior& prior, std::span<const Measurement> measurements,
                                             const ObservationModel& model, OracleMode mode = OracleMode::Auto);

struct ExactMoments {
    double mean = 0.0;      ///< E[N(A)]
    double second = 0.0;    ///< E[N(A) N(B)]
    double variance = 0.0;  ///< var N(A)
};

[[nodiscard]] ExactMoments moments_exact(const ExactPosterior& posterior, const Region& a, const Region& b);
[[nodiscard]] ExactMoments moments_exact(const ExactPosterior& posterior, const Region& a);

} // namespace regvar
