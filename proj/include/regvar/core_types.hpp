#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regvar {

// ---- Errors ----

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a model makes the observed data impossible (zero evidence,
/// empty predicted intensity, measurement outside the clutter support).
class DegenerateModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- Target and measurement spaces ----

/// Planar constant-velocity target state. Positions in meters, velocities in m/s.
struct State {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;

    [[nodiscard]] bool is_finite() const;
    friend bool operator==(const State&, const State&) = default;
};

/// Range-bearing measurement from a sensor at the origin.
/// Bearing is kept in the principal interval (-pi, pi].
struct Measurement {
    double range = 0.0;
    double bearing = 0.0;

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Wraps an angle into (-pi, pi].
[[nodiscard]] double wrap_angle(double radians);

/// Builds a measurement, wrapping the bearing. Throws InvalidInput on a
/// negative or non-finite range.
[[nodiscard]] Measurement make_measurement(double range, double bearing);

/// A realisation of the target process: a finite collection of states.
struct MultiTargetConfig {
    std::vector<State> states;
};

// ---- Particle representation of the first moment measure ----

struct Particle {
    double weight = 0.0;
    State state;
};

/// Weighted particles representing an intensity measure. The total mass is
/// the expected number of targets in the whole state space.
class WeightedParticleSet {
public:
    WeightedParticleSet() = default;
    /// Throws InvalidInput if any weight is negative or non-finite.
    explicit WeightedParticleSet(std::vector<Particle> particles);

    [[nodiscard]] std::size_t size() const { return particles_.size(); }
    [[nodiscard]] bool empty() const { return particles_.empty(); }
    [[nodiscard]] const Particle& operator[](std::size_t i) const { return particles_[i]; }
    [[nodiscard]] std::span<const Particle> particles() const { return particles_; }
    [[nodiscard]] double total_mass() const { return total_mass_; }

    [[nodiscard]] auto begin() const { return particles_.begin(); }
    [[nodiscard]] auto end() const { return particles_.end(); }

private:
    std::vector<Particle> particles_;
    double total_mass_ = 0.0;
};

// ---- Cardinality distributions ----

/// Truncated distribution over the number of targets, rho(0..n_max).
/// Always normalized after construction.
class CardinalityDistribution {
public:
    /// Dropped tail mass above which truncation is flagged.
    static constexpr double kTailWarning = 1e-6;

    /// Point mass at zero.
    CardinalityDistribution();

    /// Normalizes the given non-negative weights. Throws InvalidInput when a
    /// weight is negative/non-finite or when all weights vanish.
    explicit CardinalityDistribution(std::vector<double> weights);

    [[nodiscard]] static CardinalityDistribution poisson(double rate, std::size_t n_max);
    [[nodiscard]] static CardinalityDistribution point_mass(std::size_t n, std::size_t n_max);

    /// Truncates `weights` to 0..n_max and renormalizes, recording the
    /// relative mass that was dropped.
    [[nodiscard]] static CardinalityDistribution truncated(std::vector<double> weights,
                                                           std::size_t n_max);

    [[nodiscard]] std::size_t n_max() const { return probs_.size() - 1; }
    [[nodiscard]] std::span<const double> probabilities() const { return probs_; }
    /// rho(n), zero outside the support.
    [[nodiscard]] double operator()(std::size_t n) const {
        return n < probs_.size() ? probs_[n] : 0.0;
    }

    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;

    /// Probability mass removed by truncation at construction.
    [[nodiscard]] double dropped_tail() const { return dropped_tail_; }
    [[nodiscard]] bool truncation_warning() const { return dropped_tail_ > kTailWarning; }

private:
    std::vector<double> probs_;
    double dropped_tail_ = 0.0;
};

/// Mean and variance of the number of targets inside a region.
struct RegionalStats {
    std::string label;
    double mean = 0.0;
    double variance = 0.0;
    /// Variance before clamping at zero; differs from `variance` only by rounding.
    double raw_variance = 0.0;
};

} // namespace regvar
