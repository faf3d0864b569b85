#pragma once

#include "regvar/core_types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace regvar {

/// Dense J x m matrix stored column by column; one column per measurement.
class ColumnMatrix {
public:
    ColumnMatrix() = default;
    ColumnMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
    [[nodiscard]] std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    [[nodiscard]] std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// How clutter is spread over the circular field of view.
enum class ClutterGeometry {
    AreaUniform,   ///< uniform per unit area in Cartesian space
    PolarUniform,  ///< uniform in (range, bearing)
};

/// Sensor observation model: detection, single-target likelihood and an
/// i.i.d. clutter process. Densities are per (meter x radian).
struct ObservationModel {
    using BatchLikelihood =
        std::function<void(std::span<const Measurement>, std::span<const Particle>, ColumnMatrix&)>;

    std::function<double(const State&)> detection_probability;
    std::function<double(const Measurement&, const State&)> likelihood;
    /// Clutter spatial density c(z); integrates to one over the field of view.
    std::function<double(const Measurement&)> clutter_density;
    CardinalityDistribution clutter_cardinality;
    /// Poisson clutter rate, used by the PHD update.
    double clutter_rate = 0.0;
    /// Optional vectorised likelihood filling out(i, k) = L(z_k | x_i).
    BatchLikelihood likelihood_batch;
};

struct SensorParams {
    double sigma_range = 5.0;    // m
    double sigma_bearing = 0.0;  // rad
    double fov_radius = 3500.0;  // m
};

/// Noiseless range and bearing of a state seen from the origin.
[[nodiscard]] Measurement observe(const State& s);

/// c(z) for clutter uniform over the disc of radius R.
[[nodiscard]] double clutter_density(ClutterGeometry geometry, double fov_radius, const Measurement& z);

/// Support size used for truncated Poisson clutter cardinalities.
[[nodiscard]] std::size_t clutter_support(double rate);

/// Gaussian range-bearing sensor at the origin with constant detection
/// probability inside the field of view and Poisson clutter.
[[nodiscard]] ObservationModel range_bearing_model(const SensorParams& sensor, double p_d,
                                                   double clutter_rate, ClutterGeometry geometry);

/// Per-particle missed-detection and detection terms shared by both updates:
///   missed(i)      = (1 - p_d(x_i)) w_i
///   detected(i, k) = p_d(x_i) L(z_k | x_i) w_i
struct ConditionalWeights {
    std::vector<double> missed;
    ColumnMatrix detected;
    /// Column sums of `detected`, i.e. the detection mass behind each measurement.
    std::vector<double> detected_mass;
    std::vector<double> clutter_density;
    double missed_mass = 0.0;
    double total_mass = 0.0;

    [[nodiscard]] std::size_t num_particles() const { return missed.size(); }
    [[nodiscard]] std::size_t num_measurements() const { return detected_mass.size(); }
};

/// Throws DegenerateModel when the particle mass is zero.
[[nodiscard]] ConditionalWeights conditional_weights(const WeightedParticleSet& particles,
                                                     std::span<const Measurement> measurements,
                                                     const ObservationModel& model);

} // namespace regvar
