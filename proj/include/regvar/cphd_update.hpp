#pragma once

#include "regvar/combinatorics.hpp"
#include "regvar/core_types.hpp"
#include "regvar/observation.hpp"
#include "regvar/region.hpp"

#include <span>
#include <vector>

namespace regvar {

/// First- and second-order corrector terms of the CPHD update, all ratios of
/// <Upsilon^u[mu, Z'], rho> over the shared <Upsilon^0[mu, Z], rho>:
///   l1_phi: u=1, Z' = Z         l2_phi: u=2, Z' = Z
///   l1[k]:  u=1, Z' = Z \ z_k   l2[k]:  u=2, Z' = Z \ z_k
///   l2_pair(k, l): u=2, Z' = Z \ {z_k, z_l}, k != l; the diagonal is zero.
/// Natural logs are kept alongside; the differences used by the variance are
/// formed from them with expm1 so near-Poisson inputs do not cancel.
struct CorrectorTerms {
    double l1_phi = 0.0;
    double l2_phi = 0.0;
    std::vector<double> l1;
    std::vector<double> l2;

    double log_l1_phi = 0.0;
    double log_l2_phi = 0.0;
    std::vector<double> log_l1;
    std::vector<double> log_l2;
    /// log <Upsilon^0[mu, Z], rho>, the common denominator.
    double log_normalizer = 0.0;

    /// l2_phi - l1_phi^2
    double phi_excess = 0.0;
    /// l2[k] - l1[k] l1_phi
    std::vector<double> single_excess;

    [[nodiscard]] std::size_t num_measurements() const { return l1.size(); }
    [[nodiscard]] double l2_pair(std::size_t k, std::size_t l) const { return l2_pairs[k * l1.size() + l]; }
    [[nodiscard]] double log_l2_pair(std::size_t k, std::size_t l) const { return log_l2_pairs[k * l1.size() + l]; }
    /// l2_pair(k, l) - l1[k] l1[l] for k != l, zero on the diagonal.
    [[nodiscard]] double pair_excess(std::size_t k, std::size_t l) const { return pair_excesses[k * l1.size() + l]; }

    /// Row-major m x m tables behind the accessors above.
    std::vector<double> l2_pairs;
    std::vector<double> log_l2_pairs;
    std::vector<double> pair_excesses;
};

/// Throws DegenerateModel on zero particle mass or a zero-probability
/// measurement set (<Upsilon^0, rho> = 0), and when an observed measurement
/// lies outside the clutter support.
[[nodiscard]] CorrectorTerms cphd_correctors(const ConditionalWeights& cw, const CardinalityDistribution& rho,
                                             const CardinalityDistribution& clutter);
[[nodiscard]] CorrectorTerms cphd_correctors(const WeightedParticleSet& particles,
                                             const CardinalityDistribution& rho,
                                             std::span<const Measurement> measurements,
                                             const ObservationModel& model);

/// mu^z(X)/c(z) for each measurement, the set the ESFs are taken over.
[[nodiscard]] std::vector<double> measurement_ratios(const ConditionalWeights& cw);

/// Upsilon^0[mu, Z](n) over 0..rho.n_max().
[[nodiscard]] UpsilonVector cphd_upsilon0(const ConditionalWeights& cw, const CardinalityDistribution& rho,
                                          const CardinalityDistribution& clutter);

/// rho+(n) = Upsilon^0(n) rho(n) / sum_n' Upsilon^0(n') rho(n').
[[nodiscard]] CardinalityDistribution cphd_update_cardinality(const CardinalityDistribution& rho,
                                                              const UpsilonVector& upsilon0);

/// w+_i = missed_i l1_phi + sum_k detected(i, k) / c(z_k) l1[k]; states from `predicted`.
[[nodiscard]] WeightedParticleSet cphd_update_intensity(const ConditionalWeights& cw,
                                                        const CorrectorTerms& correctors,
                                                        const WeightedParticleSet& predicted);

/// Regional mean and variance of the CPHD-updated process over the particles
/// of `updated` that fall in `region`.
[[nodiscard]] RegionalStats cphd_regional_stats(const ConditionalWeights& cw, const CorrectorTerms& correctors,
                                                const WeightedParticleSet& updated, const Region& region);

/// Everything one CPHD data update produces.
struct CphdUpdateResult {
    ConditionalWeights weights;
    CorrectorTerms correctors;
    CardinalityDistribution cardinality;
    WeightedParticleSet intensity;
};

[[nodiscard]] CphdUpdateResult cphd_update(const WeightedParticleSet& predicted, const CardinalityDistribution& rho,
                                           std::span<const Measurement> measurements,
                                           const ObservationModel& model);

} // namespace regvar
