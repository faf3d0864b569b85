#pragma once

#include "regvar/core_types.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace regvar {

using Rng = std::mt19937_64;

/// Survival, motion and birth for the SMC prediction step.
struct MotionModel {
    /// Propagates one state over dt seconds, drawing any noise from the generator.
    std::function<State(const State&, double, Rng&)> transition;
    /// p_s(x) in [0, 1].
    std::function<double(const State&)> survival;
    /// Draws one birth state.
    std::function<State(Rng&)> birth_sampler;
    /// Expected number of births per step (the birth intensity mass).
    double birth_mean = 0.0;
    /// Particles used to represent the birth intensity each step.
    std::size_t birth_particles = 0;
};

/// Nearly-constant-velocity motion with white acceleration noise of standard
/// deviation `accel_sigma` (m/s^2) per axis.
[[nodiscard]] State constant_velocity(const State& s, double dt, double accel_sigma, Rng& rng);

struct MotionParams {
    double accel_sigma = 1.0;        ///< process noise, m/s^2 per axis
    double survival = 0.99;          ///< p_s inside the field of view
    double fov_radius = 3500.0;      ///< p_s = 0 beyond this range
    double birth_mean = 0.1;         ///< expected births per step
    double birth_velocity_sigma = 10.0;  ///< m/s per axis
    std::size_t birth_particles = 4000;
};

/// Constant-velocity model with constant survival inside the field of view,
/// zero outside, and births uniform over the field-of-view disc.
[[nodiscard]] MotionModel default_motion_model(const MotionParams& params);

/// Survivors keep their index order with weights scaled by p_s; birth
/// particles are appended with total mass birth_mean.
[[nodiscard]] WeightedParticleSet predict_particles(const WeightedParticleSet& particles, const MotionModel& model,
                                                    double dt, Rng& rng);
[[nodiscard]] WeightedParticleSet predict_particles(const WeightedParticleSet& particles, const MotionModel& model,
                                                    double dt, std::uint64_t seed);

/// Binomial thinning of rho with survival p_s convolved with the birth
/// cardinality, truncated to n_max and renormalized.
[[nodiscard]] CardinalityDistribution predict_cardinality(const CardinalityDistribution& rho, double p_s,
                                                          const CardinalityDistribution& birth, std::size_t n_max);

/// Multinomial resampling to `count` equally weighted particles; total mass preserved.
[[nodiscard]] WeightedParticleSet resample_multinomial(const WeightedParticleSet& particles, std::size_t count,
                                                       Rng& rng);

} // namespace regvar
