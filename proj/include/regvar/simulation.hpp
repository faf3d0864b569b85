#pragma once

#include "regvar/core_types.hpp"
#include "regvar/observation.hpp"
#include "regvar/prediction.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace regvar {

/// One ground-truth trajectory. `initial` is the state at the birth time;
/// the track is alive for birth <= t < death.
struct Track {
    State initial;
    double birth = 0.0;
    double death = 0.0;
};

struct Scenario {
    std::vector<Track> tracks;
    SensorParams sensor;
    double clutter_rate = 20.0;
    double p_d = 0.95;
    double dt = 1.0;
    double horizon = 190.0;
    ClutterGeometry clutter_geometry = ClutterGeometry::AreaUniform;
    /// Acceleration noise of the true trajectories, m/s^2 per axis.
    double truth_accel_sigma = 0.02;

    [[nodiscard]] std::size_t num_steps() const;
    [[nodiscard]] double time(std::size_t step) const { return static_cast<double>(step) * dt; }
    /// Throws InvalidInput naming the offending field.
    void validate() const;
};

constexpr double kDegree = 0.017453292519943295;

/// Sensor presets: 5 m / 1 deg and 12.5 m / 2.5 deg, both with a 3500 m field of view.
[[nodiscard]] SensorParams superior_sensor();
[[nodiscard]] SensorParams inferior_sensor();

/// The five-track scenario with tracks 1 and 2 crossing at t = 55 s.
[[nodiscard]] Scenario scenario_five_track();
/// Same, but track 2 starts at (1850, 4000) with velocity (-10, -10); it runs
/// parallel to track 1 and never comes closer than ~1.86 km.
[[nodiscard]] Scenario scenario_five_track_alt();

/// Per-step realisations; `track_ids[k][j]` is the track index of `configs[k].states[j]`.
struct GroundTruth {
    std::vector<double> times;
    std::vector<MultiTargetConfig> configs;
    std::vector<std::vector<std::size_t>> track_ids;

    [[nodiscard]] std::size_t num_steps() const { return configs.size(); }
    [[nodiscard]] std::optional<State> track_state(std::size_t track, std::size_t step) const;
};

/// Each track follows the constant-velocity model from its birth, with its
/// own noise stream derived from (seed, track index).
[[nodiscard]] GroundTruth generate_truth(const Scenario& scenario, std::uint64_t seed);

/// One scan: detections of in-view targets with probability p_d plus Poisson
/// clutter uniform over the field of view, in random order. Noisy returns
/// falling outside [0, fov_radius] are dropped.
[[nodiscard]] std::vector<Measurement> generate_measurements(const MultiTargetConfig& truth, const Scenario& scenario,
                                                             Rng& rng);
/// All scans of a run; scan k draws from a stream derived from (seed, k).
[[nodiscard]] std::vector<std::vector<Measurement>> generate_measurements(const GroundTruth& truth,
                                                                          const Scenario& scenario,
                                                                          std::uint64_t seed);

/// Rows `t,track,x,y,vx,vy`.
void write_truth_csv(std::ostream& os, const GroundTruth& truth);
/// Rows `t,index,range,bearing`.
void write_measurements_csv(std::ostream& os, const GroundTruth& truth,
                            const std::vector<std::vector<Measurement>>& scans);

} // namespace regvar
