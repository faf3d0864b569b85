#pragma once

#include "regvar/core_types.hpp"
#include "regvar/cphd_update.hpp"
#include "regvar/observation.hpp"
#include "regvar/phd_update.hpp"
#include "regvar/prediction.hpp"
#include "regvar/region.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace regvar {

enum class FilterKind { Phd, Cphd };

[[nodiscard]] std::string_view to_string(FilterKind kind);
/// "phd" or "cphd"; throws InvalidInput otherwise.
[[nodiscard]] FilterKind parse_filter_kind(std::string_view name);

struct FilterConfig {
    FilterKind kind = FilterKind::Cphd;
    /// Largest target count the CPHD cardinality distribution carries.
    std::size_t n_max = 50;
    /// Resampling budget: particles per unit of intensity mass.
    std::size_t particles_per_target = 1000;
    std::size_t min_particles = 500;
    std::size_t max_particles = 50000;
    MotionParams motion;
};

/// Posterior after one data update. Regional statistics are evaluated on
/// demand so callers can probe many regions of the same scan.
class UpdateSnapshot {
public:
    UpdateSnapshot() = default;
    UpdateSnapshot(ConditionalWeights cw, CphdUpdateResult cphd);
    UpdateSnapshot(ConditionalWeights cw, PhdConditionalWeights phd, WeightedParticleSet intensity);

    [[nodiscard]] FilterKind kind() const { return kind_; }
    [[nodiscard]] RegionalStats stats(const Region& region) const;
    [[nodiscard]] const WeightedParticleSet& intensity() const { return intensity_; }
    /// Updated cardinality distribution (CPHD only; empty optional semantics via has_cardinality).
    [[nodiscard]] bool has_cardinality() const { return kind_ == FilterKind::Cphd; }
    [[nodiscard]] const CardinalityDistribution& cardinality() const { return cardinality_; }
    [[nodiscard]] std::size_t num_measurements() const { return cw_.num_measurements(); }

private:
    FilterKind kind_ = FilterKind::Phd;
    ConditionalWeights cw_;
    PhdConditionalWeights phd_;
    CorrectorTerms correctors_;
    WeightedParticleSet intensity_;
    CardinalityDistribution cardinality_;
};

/// SMC PHD / CPHD filter: predict, update, resample. The filter starts with
/// no targets; everything enters through the birth model.
class SmcFilter {
public:
    SmcFilter(FilterConfig config, ObservationModel model, std::uint64_t seed);

    /// One scan: predicts over dt, runs the data update and resamples the
    /// posterior for the next step. The returned snapshot holds the
    /// un-resampled posterior.
    [[nodiscard]] UpdateSnapshot step(std::span<const Measurement> measurements, double dt);

    [[nodiscard]] const WeightedParticleSet& particles() const { return particles_; }
    [[nodiscard]] const CardinalityDistribution& cardinality() const { return rho_; }
    [[nodiscard]] const FilterConfig& config() const { return config_; }

private:
    FilterConfig config_;
    ObservationModel model_;
    MotionModel motion_;
    CardinalityDistribution birth_cardinality_;
    Rng rng_;
    WeightedParticleSet particles_;
    CardinalityDistribution rho_;
};

} // namespace regvar
