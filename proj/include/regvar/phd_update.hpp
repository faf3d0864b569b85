#pragma once

#include "regvar/core_types.hpp"
#include "regvar/observation.hpp"
#include "regvar/region.hpp"

#include <span>
#include <vector>

namespace regvar {

/// Missed-detection weights and normalized per-measurement weights of the
/// PHD data update.
struct PhdConditionalWeights {
    std::vector<double> missed;
    /// per_measurement(i, k) = p_d L(z_k|x_i) w_i / normalizers[k]
    ColumnMatrix per_measurement;
    /// mu^{z_k}(X) + lambda_c c(z_k), one per measurement.
    std::vector<double> normalizers;
};

/// Throws DegenerateModel on zero particle mass or a zero normalizer.
[[nodiscard]] PhdConditionalWeights phd_conditional_weights(const WeightedParticleSet& particles,
                                                            std::span<const Measurement> measurements,
                                                            const ObservationModel& model);
[[nodiscard]] PhdConditionalWeights phd_conditional_weights(const ConditionalWeights& cw, double clutter_rate);

/// w+_i = missed_i + sum_k per_measurement(i, k); states are taken from `predicted`.
[[nodiscard]] WeightedParticleSet phd_update_intensity(const PhdConditionalWeights& cw,
                                                       const WeightedParticleSet& predicted);

/// Regional mean and variance of the PHD-updated process:
///   mean = mu^phi(B) + sum_k p_k(B)
///   var  = mu^phi(B) + sum_k p_k(B) (1 - p_k(B))
/// with p_k(B) the normalized measurement weight summed over particles in B.
/// `updated` supplies the particle states (same ordering as `cw`).
[[nodiscard]] RegionalStats phd_regional_stats(const PhdConditionalWeights& cw,
                                               const WeightedParticleSet& updated, const Region& region);

} // namespace regvar
