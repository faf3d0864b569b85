#include "regvar/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace regvar {

namespace {

Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return Rng(seq);
}

constexpr std::uint64_t kTruthStream = 0x7472;
constexpr std::uint64_t kScanStream = 0x6d73;

} // namespace

std::size_t Scenario::num_steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

void Scenario::validate() const {
    if (!(dt > 0.0)) throw InvalidInput("scenario.dt must be positive");
    if (!(horizon > 0.0)) throw InvalidInput("scenario.horizon must be positive");
    if (!(sensor.sigma_range > 0.0)) throw InvalidInput("sensor.sigma_range must be positive");
    if (!(sensor.sigma_bearing > 0.0)) throw InvalidInput("sensor.sigma_bearing must be positive");
    if (!(sensor.fov_radius > 0.0)) throw InvalidInput("sensor.fov_radius must be positive");
    if (!(clutter_rate >= 0.0)) throw InvalidInput("scenario.clutter_rate must be non-negative");
    if (!(p_d > 0.0 && p_d <= 1.0)) throw InvalidInput("scenario.p_d must lie in (0, 1]");
    if (!(truth_accel_sigma >= 0.0)) throw InvalidInput("scenario.truth_accel_sigma must be non-negative");
    for (const Track& t : tracks) {
        if (!(t.birth < t.death)) throw InvalidInput("scenario.tracks: birth must precede death");
        if (!t.initial.is_finite()) throw InvalidInput("scenario.tracks: initial state must be finite");
    }
}

SensorParams superior_sensor() { return SensorParams{5.0, 1.0 * kDegree, 3500.0}; }
SensorParams inferior_sensor() { return SensorParams{12.5, 2.5 * kDegree, 3500.0}; }

Scenario scenario_five_track() {
    Scenario s;
    s.sensor = superior_sensor();
    s.tracks = {
        {{2000.0, 2000.0, -9.1, -9.1}, 0.0, 110.0},
        {{1855.0, 1150.0, -10.0, 10.0}, 20.0, 130.0},
        {{1800.0, 1800.0, -10.0, 0.0}, 40.0, 150.0},
        {{1000.0, 1000.0, 10.0, 0.0}, 70.0, 170.0},
        {{1250.0, 2350.0, 12.0, -12.0}, 90.0, 190.0},
    };
    return s;
}

Scenario scenario_five_track_alt() {
    Scenario s = scenario_five_track();
    s.tracks[1].initial = State{1850.0, 4000.0, -10.0, -10.0};
    return s;
}

std::optional<State> GroundTruth::track_state(std::size_t track, std::size_t step) const {
    if (step >= configs.size()) return std::nullopt;
    for (std::size_t j = 0; j < track_ids[step].size(); ++j)
        if (track_ids[step][j] == track) return configs[step].states[j];
    return std::nullopt;
}

GroundTruth generate_truth(const Scenario& scenario, std::uint64_t seed) {
    scenario.validate();
    const std::size_t steps = scenario.num_steps();
    GroundTruth g;
    g.times.resize(steps);
    g.configs.resize(steps);
    g.track_ids.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) g.times[k] = scenario.time(k);

    for (std::size_t tr = 0; tr < scenario.tracks.size(); ++tr) {
        const Track& track = scenario.tracks[tr];
        Rng rng = derived_rng(seed, tr, kTruthStream);
        std::optional<State> current;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = g.times[k];
            if (t < track.birth || t >= track.death) continue;
            if (!current) {
                // First alive step: move from the birth time to the grid time noiselessly.
                const double lag = t - track.birth;
                current = State{track.initial.x + track.initial.vx * lag, track.initial.y + track.initial.vy * lag,
                                track.initial.vx, track.initial.vy};
            } else {
                current = constant_velocity(*current, scenario.dt, scenario.truth_accel_sigma, rng);
            }
            g.configs[k].states.push_back(*current);
            g.track_ids[k].push_back(tr);
        }
    }
    return g;
}

std::vector<Measurement> generate_measurements(const MultiTargetConfig& truth, const Scenario& scenario, Rng& rng) {
    const double R = scenario.sensor.fov_radius;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> range_noise(0.0, scenario.sensor.sigma_range);
    std::normal_distribution<double> bearing_noise(0.0, scenario.sensor.sigma_bearing);

    std::vector<Measurement> out;
    for (const State& s : truth.states) {
        const Measurement h = observe(s);
        if (h.range > R) continue;
        if (!(unit(rng) < scenario.p_d)) continue;
        const double r = h.range + range_noise(rng);
        const double b = h.bearing + bearing_noise(rng);
        if (r < 0.0 || r > R) continue;
        out.push_back(make_measurement(r, b));
    }
    if (scenario.clutter_rate > 0.0) {
        std::poisson_distribution<int> count(scenario.clutter_rate);
        const int n = count(rng);
        for (int j = 0; j < n; ++j) {
            const double u = unit(rng);
            const double r = scenario.clutter_geometry == ClutterGeometry::AreaUniform ? R * std::sqrt(u) : R * u;
            const double b = std::numbers::pi * (2.0 * unit(rng) - 1.0);
            out.push_back(make_measurement(r, b));
        }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

std::vector<std::vector<Measurement>> generate_measurements(const GroundTruth& truth, const Scenario& scenario,
                                                            std::uint64_t seed) {
    std::vector<std::vector<Measurement>> scans(truth.num_steps());
    for (std::size_t k = 0; k < scans.size(); ++k) {
        Rng rng = derived_rng(seed, k, kScanStream);
        scans[k] = generate_measurements(truth.configs[k], scenario, rng);
    }
    return scans;
}

void write_truth_csv(std::ostream& os, const GroundTruth& truth) {
    os << "t,track,x,y,vx,vy\n";
    for (std::size_t k = 0; k < truth.num_steps(); ++k)
        for (std::size_t j = 0; j < truth.configs[k].states.size(); ++j) {
            const State& s = truth.configs[k].states[j];
            os << truth.times[k] << ',' << truth.track_ids[k][j] + 1 << ',' << s.x << ',' << s.y << ',' << s.vx << ','
               << s.vy << '\n';
        }
}

void write_measurements_csv(std::ostream& os, const GroundTruth& truth,
                            const std::vector<std::vector<Measurement>>& scans) {
    os << "t,index,range,bearing\n";
    for (std::size_t k = 0; k < scans.size(); ++k)
        for (std::size_t j = 0; j < scans[k].size(); ++j)
            os << truth.times[k] << ',' << j << ',' << scans[k][j].range << ',' << scans[k][j].bearing << '\n';
}

} // namespace regvar
