#include "regvar/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace regvar {

namespace {

using json = nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<double> default_radii() {
    std::vector<double> r(200);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i + 1);
    return r;
}

// ---- JSON helpers ----

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(field, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> get_number_list(const json& j, const std::string& field) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(field, "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> get_radii(const json& j, const std::string& field) {
    if (j.is_object()) {
        check_keys(j, field, {"from", "to", "step"});
        const double from = get_number(j.at("from"), field + ".from");
        const double to = get_number(j.at("to"), field + ".to");
        const double step = j.contains("step") ? get_number(j["step"], field + ".step") : 1.0;
        if (!(step > 0.0) || to < from) throw ConfigError(field, "need from <= to and a positive step");
        std::vector<double> out;
        for (std::size_t i = 0;; ++i) {
            const double r = from + step * static_cast<double>(i);
            if (r > to + 1e-9) break;
            out.push_back(r);
        }
        return out;
    }
    return get_number_list(j, field);
}

SensorParams parse_sensor(const json& j, const std::string& field) {
    if (j.is_string()) return sensor_preset(j.get<std::string>());
    check_keys(j, field, {"preset", "sigma_range", "sigma_bearing_deg", "fov_radius"});
    SensorParams s = j.contains("preset") ? sensor_preset(j["preset"].get<std::string>()) : superior_sensor();
    if (j.contains("sigma_range")) s.sigma_range = get_number(j["sigma_range"], field + ".sigma_range");
    if (j.contains("sigma_bearing_deg"))
        s.sigma_bearing = get_number(j["sigma_bearing_deg"], field + ".sigma_bearing_deg") * kDegree;
    if (j.contains("fov_radius")) s.fov_radius = get_number(j["fov_radius"], field + ".fov_radius");
    return s;
}

Scenario parse_scenario(const json& j) {
    const std::string f = "scenario";
    check_keys(j, f,
               {"preset", "tracks", "sensor", "clutter_rate", "p_d", "dt", "horizon", "clutter_geometry",
                "truth_accel_sigma"});
    Scenario s = scenario_five_track();
    if (j.contains("preset")) {
        const std::string p = j["preset"].get<std::string>();
        if (p == "five-track")
            s = scenario_five_track();
        else if (p == "five-track-alt")
            s = scenario_five_track_alt();
        else
            throw ConfigError(f + ".preset", "expected 'five-track' or 'five-track-alt'");
    }
    if (j.contains("tracks")) {
        const json& tr = j["tracks"];
        if (!tr.is_array()) throw ConfigError(f + ".tracks", "expected a list");
        s.tracks.clear();
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const std::string g = f + ".tracks[" + std::to_string(i) + "]";
            check_keys(tr[i], g, {"x", "y", "vx", "vy", "birth", "death"});
            Track t;
            t.initial = State{get_number(tr[i].at("x"), g + ".x"), get_number(tr[i].at("y"), g + ".y"),
                              get_number(tr[i].at("vx"), g + ".vx"), get_number(tr[i].at("vy"), g + ".vy")};
            t.birth = get_number(tr[i].at("birth"), g + ".birth");
            t.death = get_number(tr[i].at("death"), g + ".death");
            s.tracks.push_back(t);
        }
    }
    if (j.contains("sensor")) s.sensor = parse_sensor(j["sensor"], f + ".sensor");
    if (j.contains("clutter_rate")) s.clutter_rate = get_number(j["clutter_rate"], f + ".clutter_rate");
    if (j.contains("p_d")) s.p_d = get_number(j["p_d"], f + ".p_d");
    if (j.contains("dt")) s.dt = get_number(j["dt"], f + ".dt");
    if (j.contains("horizon")) s.horizon = get_number(j["horizon"], f + ".horizon");
    if (j.contains("truth_accel_sigma"))
        s.truth_accel_sigma = get_number(j["truth_accel_sigma"], f + ".truth_accel_sigma");
    if (j.contains("clutter_geometry")) {
        const std::string g = j["clutter_geometry"].get<std::string>();
        if (g == "area")
            s.clutter_geometry = ClutterGeometry::AreaUniform;
        else if (g == "polar")
            s.clutter_geometry = ClutterGeometry::PolarUniform;
        else
            throw ConfigError(f + ".clutter_geometry", "expected 'area' or 'polar'");
    }
    return s;
}

RegionSpec parse_region(const json& j, const std::string& f) {
    check_keys(j, f, {"type", "name", "center", "radius", "radii", "track"});
    if (!j.contains("type")) throw ConfigError(f + ".type", "missing");
    const std::string type = j["type"].get<std::string>();
    RegionSpec r;
    if (type == "full-fov") {
        r.kind = RegionSpec::Kind::FullFov;
        r.name = "fov";
    } else if (type == "disc") {
        r.kind = RegionSpec::Kind::Disc;
        if (!j.contains("center") || !j["center"].is_array() || j["center"].size() != 2)
            throw ConfigError(f + ".center", "expected [x, y]");
        r.cx = get_number(j["center"][0], f + ".center[0]");
        r.cy = get_number(j["center"][1], f + ".center[1]");
        if (!j.contains("radius")) throw ConfigError(f + ".radius", "missing");
        r.radii = {get_number(j["radius"], f + ".radius")};
        r.name = "disc";
    } else if (type == "disc-around-track") {
        r.kind = RegionSpec::Kind::DiscAroundTrack;
        r.track = j.contains("track") ? get_count(j["track"], f + ".track") : 1;
        if (j.contains("radii"))
            r.radii = get_radii(j["radii"], f + ".radii");
        else if (j.contains("radius"))
            r.radii = {get_number(j["radius"], f + ".radius")};
        else
            throw ConfigError(f + ".radii", "missing");
        r.name = "track" + std::to_string(r.track);
    } else {
        throw ConfigError(f + ".type", "expected 'full-fov', 'disc' or 'disc-around-track'");
    }
    if (j.contains("name")) r.name = j["name"].get<std::string>();
    return r;
}

std::string format_radius(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

// Regions of one step with their labels; DiscAroundTrack skips dead tracks.
std::vector<Region> build_regions(const std::vector<RegionSpec>& specs, const GroundTruth& truth, std::size_t step,
                                  double fov_radius) {
    std::vector<Region> out;
    for (const RegionSpec& s : specs) {
        switch (s.kind) {
        case RegionSpec::Kind::FullFov:
            out.push_back(region_fov(fov_radius, s.name));
            break;
        case RegionSpec::Kind::Disc:
            out.push_back(region_disc(s.cx, s.cy, s.radii.front(), s.name));
            break;
        case RegionSpec::Kind::DiscAroundTrack: {
            const auto st = truth.track_state(s.track - 1, step);
            if (!st) break;
            for (double r : s.radii)
                out.push_back(region_disc(st->x, st->y, r, s.name + "_r" + format_radius(r)));
            break;
        }
        }
    }
    return out;
}

// Runs fn(i) for i in [0, n) on a fixed pool; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard lock(mu);
                    if (next >= n || error) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

ObservationModel scenario_model(const Scenario& s, double p_d) {
    return range_bearing_model(s.sensor, p_d, s.clutter_rate, s.clutter_geometry);
}

} // namespace

// ---- Config ----

void ExperimentConfig::validate() const {
    try {
        scenario.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError("scenario", e.what());
    }
    if (filters.empty()) throw ConfigError("filter", "at least one filter is required");
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    if (pd_values.empty()) throw ConfigError("pd", "at least one detection probability is required");
    for (double pd : pd_values)
        if (!(pd > 0.0 && pd <= 1.0)) throw ConfigError("pd", "values must lie in (0, 1]");
    if (regions.empty()) throw ConfigError("regions", "at least one region is required");
    for (const RegionSpec& r : regions) {
        if (r.kind != RegionSpec::Kind::FullFov && r.radii.empty()) throw ConfigError("regions", "radius missing");
        for (double rad : r.radii)
            if (!(rad >= 0.0)) throw ConfigError("regions", "radii must be non-negative");
        if (r.kind == RegionSpec::Kind::DiscAroundTrack && (r.track == 0 || r.track > scenario.tracks.size()))
            throw ConfigError("regions.track", "no such track");
    }
    if (filter.n_max == 0) throw ConfigError("n_max", "must be positive");
    if (filter.particles_per_target == 0) throw ConfigError("particles_per_target", "must be positive");
    if (!(filter.motion.survival >= 0.0 && filter.motion.survival <= 1.0))
        throw ConfigError("motion.survival", "must lie in [0, 1]");
    if (!(filter.motion.birth_mean > 0.0)) throw ConfigError("motion.birth_mean", "must be positive");
    if (filter.motion.birth_particles == 0) throw ConfigError("motion.birth_particles", "must be positive");
    if (!(filter.motion.accel_sigma >= 0.0)) throw ConfigError("motion.accel_sigma", "must be non-negative");
    if (resolve.track == 0 || resolve.track > scenario.tracks.size()) throw ConfigError("resolve.track", "no such track");
}

SensorParams sensor_preset(std::string_view name) {
    if (name == "superior") return superior_sensor();
    if (name == "inferior") return inferior_sensor();
    throw ConfigError("sensor", "expected 'superior' or 'inferior'");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    const std::string s(text);
    if (s.find(',') == std::string::npos) {
        std::size_t used = 0;
        unsigned long long n = 0;
        try {
            n = std::stoull(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("seeds", "expected a count or a comma separated list");
        }
        if (used != s.size() || n == 0) throw ConfigError("seeds", "expected a positive count");
        for (std::uint64_t i = 1; i <= n; ++i) out.push_back(i);
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw ConfigError("seeds", "bad entry '" + item + "'");
        }
    }
    return out;
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("pd", "bad entry '" + item + "'");
        }
    }
    return out;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", e.what());
    }
    check_keys(j, "",
               {"scenario", "filter", "n_max", "particles_per_target", "min_particles", "max_particles", "motion",
                "seeds", "pd", "regions", "resolve", "output", "threads"});
    ExperimentConfig c;
    try {
        if (j.contains("scenario")) c.scenario = parse_scenario(j["scenario"]);
        if (j.contains("filter")) {
            c.filters.clear();
            const json& f = j["filter"];
            auto kind = [](const json& e) {
                if (!e.is_string()) throw ConfigError("filter", "expected 'phd' or 'cphd'");
                const std::string name = e.get<std::string>();
                if (name != "phd" && name != "cphd") throw ConfigError("filter", "unknown filter '" + name + "'");
                return parse_filter_kind(name);
            };
            if (f.is_string())
                c.filters.push_back(kind(f));
            else if (f.is_array())
                for (const auto& e : f) c.filters.push_back(kind(e));
            else
                throw ConfigError("filter", "expected 'phd', 'cphd' or a list");
        }
        if (j.contains("n_max")) c.filter.n_max = get_count(j["n_max"], "n_max");
        if (j.contains("particles_per_target"))
            c.filter.particles_per_target = get_count(j["particles_per_target"], "particles_per_target");
        if (j.contains("min_particles")) c.filter.min_particles = get_count(j["min_particles"], "min_particles");
        if (j.contains("max_particles")) c.filter.max_particles = get_count(j["max_particles"], "max_particles");
        if (j.contains("motion")) {
            const json& m = j["motion"];
            check_keys(m, "motion",
                       {"accel_sigma", "survival", "birth_mean", "birth_velocity_sigma", "birth_particles"});
            auto& mp = c.filter.motion;
            if (m.contains("accel_sigma")) mp.accel_sigma = get_number(m["accel_sigma"], "motion.accel_sigma");
            if (m.contains("survival")) mp.survival = get_number(m["survival"], "motion.survival");
            if (m.contains("birth_mean")) mp.birth_mean = get_number(m["birth_mean"], "motion.birth_mean");
            if (m.contains("birth_velocity_sigma"))
                mp.birth_velocity_sigma = get_number(m["birth_velocity_sigma"], "motion.birth_velocity_sigma");
            if (m.contains("birth_particles"))
                mp.birth_particles = get_count(m["birth_particles"], "motion.birth_particles");
        }
        if (j.contains("seeds")) {
            const json& s = j["seeds"];
            if (s.is_number_integer()) {
                c.seeds = parse_seed_list(std::to_string(get_count(s, "seeds")));
            } else if (s.is_array()) {
                c.seeds.clear();
                for (std::size_t i = 0; i < s.size(); ++i)
                    c.seeds.push_back(get_count(s[i], "seeds[" + std::to_string(i) + "]"));
            } else {
                throw ConfigError("seeds", "expected a count or a list");
            }
        }
        if (j.contains("pd")) c.pd_values = get_number_list(j["pd"], "pd");
        if (j.contains("regions")) {
            const json& r = j["regions"];
            if (!r.is_array()) throw ConfigError("regions", "expected a list");
            c.regions.clear();
            for (std::size_t i = 0; i < r.size(); ++i)
                c.regions.push_back(parse_region(r[i], "regions[" + std::to_string(i) + "]"));
        }
        if (j.contains("resolve")) {
            const json& r = j["resolve"];
            check_keys(r, "resolve", {"times", "track", "radii"});
            if (r.contains("times")) c.resolve.times = get_number_list(r["times"], "resolve.times");
            if (r.contains("track")) c.resolve.track = get_count(r["track"], "resolve.track");
            if (r.contains("radii")) c.resolve.radii = get_radii(r["radii"], "resolve.radii");
        }
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("threads")) c.threads = get_count(j["threads"], "threads");
    } catch (const json::exception& e) {
        throw ConfigError("config", e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

// ---- Monte-Carlo runs ----

std::vector<ResultRow> run_filter_experiment(const ExperimentConfig& config) {
    config.validate();
    struct Task {
        std::size_t pd_index;
        std::size_t filter_index;
        std::size_t run;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < config.pd_values.size(); ++p)
        for (std::size_t f = 0; f < config.filters.size(); ++f)
            for (std::size_t r = 0; r < config.seeds.size(); ++r) tasks.push_back({p, f, r});

    std::vector<std::vector<ResultRow>> slots(tasks.size());
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
        const Task& task = tasks[i];
        const std::uint64_t seed = config.seeds[task.run];
        const double pd = config.pd_values[task.pd_index];
        const FilterKind kind = config.filters[task.filter_index];

        Scenario scenario = config.scenario;
        scenario.p_d = pd;
        const GroundTruth truth = generate_truth(scenario, seed);
        const auto scans = generate_measurements(truth, scenario, seed);

        FilterConfig fc = config.filter;
        fc.kind = kind;
        fc.motion.fov_radius = scenario.sensor.fov_radius;
        SmcFilter filter(fc, scenario_model(scenario, pd), mix_seed(seed, 0x66696c74, 0));

        auto& rows = slots[i];
        std::size_t step = 0;
        try {
            for (; step < truth.num_steps(); ++step) {
                const UpdateSnapshot snap = filter.step(scans[step], scenario.dt);
                for (const Region& region : build_regions(config.regions, truth, step, scenario.sensor.fov_radius)) {
                    const RegionalStats st = snap.stats(region);
                    rows.push_back(ResultRow{task.run, seed, truth.times[step], kind, region.label(), pd, st.mean,
                                             st.variance, count_in_region(truth.configs[step], region)});
                }
            }
        } catch (const InvalidInput& e) {
            throw InvalidInput("run " + std::to_string(task.run) + " (seed " + std::to_string(seed) + "), step " +
                               std::to_string(step) + ": " + e.what());
        } catch (const std::exception& e) {
            throw DegenerateModel("run " + std::to_string(task.run) + " (seed " + std::to_string(seed) + "), step " +
                                  std::to_string(step) + ": " + e.what());
        }
    });

    std::vector<ResultRow> out;
    for (auto& s : slots) out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return out;
}

std::vector<AggregateRow> aggregate_rows(std::span<const ResultRow> rows) {
    // Key order (pd index, filter, region first appearance, t) follows the row order.
    using Key = std::tuple<double, int, std::string, double>;
    std::map<Key, std::size_t> index;
    std::vector<AggregateRow> out;
    for (const ResultRow& r : rows) {
        const Key key{r.pd, static_cast<int>(r.filter), r.region, r.t};
        auto [it, inserted] = index.try_emplace(key, out.size());
        if (inserted) out.push_back(AggregateRow{r.t, r.filter, r.region, r.pd, 0.0, 0.0, 0.0, 0});
        AggregateRow& a = out[it->second];
        a.mean += r.mean;
        a.var += r.var;
        a.true_count += static_cast<double>(r.true_count);
        ++a.n_runs;
    }
    for (AggregateRow& a : out) {
        const double n = static_cast<double>(a.n_runs);
        a.mean /= n;
        a.var /= n;
        a.true_count /= n;
    }
    return out;
}

void write_rows_csv(std::ostream& os, std::span<const ResultRow> rows) {
    os << "run,seed,t,filter,region,pd,mean,var,true_count\n" << std::setprecision(12);
    for (const ResultRow& r : rows)
        os << r.run << ',' << r.seed << ',' << r.t << ',' << to_string(r.filter) << ',' << r.region << ',' << r.pd
           << ',' << r.mean << ',' << r.var << ',' << r.true_count << '\n';
}

void write_aggregates_csv(std::ostream& os, std::span<const AggregateRow> rows) {
    os << "t,filter,region,pd,mean,var,true_count,n_runs\n" << std::setprecision(12);
    for (const AggregateRow& r : rows)
        os << r.t << ',' << to_string(r.filter) << ',' << r.region << ',' << r.pd << ',' << r.mean << ',' << r.var
           << ',' << r.true_count << ',' << r.n_runs << '\n';
}

// ---- Resolution ----

std::vector<ResolutionRow> run_resolution(const ExperimentConfig& config, const SensorParams& sensor,
                                          const std::string& sensor_label, std::uint64_t seed) {
    config.validate();
    Scenario scenario = config.scenario;
    scenario.sensor = sensor;
    scenario.p_d = config.pd_values.front();
    const GroundTruth truth = generate_truth(scenario, seed);
    const auto scans = generate_measurements(truth, scenario, seed);
    const std::vector<double> radii = config.resolve.radii.empty() ? default_radii() : config.resolve.radii;

    std::vector<std::size_t> wanted;
    for (double t : config.resolve.times) {
        const auto k = static_cast<long long>(std::llround(t / scenario.dt));
        if (k < 0 || static_cast<std::size_t>(k) >= truth.num_steps())
            throw ConfigError("resolve.times", "time outside the scenario horizon");
        wanted.push_back(static_cast<std::size_t>(k));
    }
    const std::size_t last = *std::max_element(wanted.begin(), wanted.end());

    FilterConfig fc = config.filter;
    fc.kind = config.filters.front();
    fc.motion.fov_radius = scenario.sensor.fov_radius;
    SmcFilter filter(fc, scenario_model(scenario, scenario.p_d), mix_seed(seed, 0x66696c74, 0));

    std::vector<ResolutionRow> rows;
    for (std::size_t step = 0; step <= last; ++step) {
        const UpdateSnapshot snap = filter.step(scans[step], scenario.dt);
        if (std::find(wanted.begin(), wanted.end(), step) == wanted.end()) continue;
        const auto centre = truth.track_state(config.resolve.track - 1, step);
        if (!centre) throw ConfigError("resolve.track", "track not alive at t = " + std::to_string(truth.times[step]));
        for (double r : radii) {
            const Region disc = region_disc(centre->x, centre->y, r);
            const RegionalStats st = snap.stats(disc);
            rows.push_back(ResolutionRow{seed, sensor_label, truth.times[step], r, st.mean, st.variance,
                                         count_in_region(truth.configs[step], disc)});
        }
    }
    return rows;
}

void write_resolution_csv(std::ostream& os, std::span<const ResolutionRow> rows) {
    os << "seed,sensor,t,radius,mean,var,true_count\n" << std::setprecision(12);
    for (const ResolutionRow& r : rows)
        os << r.seed << ',' << r.sensor << ',' << r.t << ',' << r.radius << ',' << r.mean << ',' << r.var << ','
           << r.true_count << '\n';
}

std::optional<std::size_t> find_resolution_dip(std::span<const double> var, std::span<const double> mean,
                                               const DipCriteria& c) {
    if (var.size() != mean.size()) throw InvalidInput("variance and mean curves differ in length");
    const std::size_t n = var.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // plateau-tolerant local minimum
        if (!(var[i] <= var[i - 1] && var[i] <= var[i + 1])) continue;
        if (mean[i] < c.mean_low || mean[i] > c.mean_high) continue;
        const double left = *std::max_element(var.begin(), var.begin() + static_cast<std::ptrdiff_t>(i));
        const double right = *std::max_element(var.begin() + static_cast<std::ptrdiff_t>(i) + 1, var.end());
        if (left >= var[i] + c.prominence && right >= var[i] + c.prominence) return i;
    }
    return std::nullopt;
}

// ---- Oracle self-check ----

OracleInstance random_oracle_instance(const OracleInstanceSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };

    OracleInstance inst;
    const std::size_t S = pick(1, spec.max_points);
    for (std::size_t s = 0; s < S; ++s)
        inst.prior.points.push_back(State{600.0 + uniform(-200.0, 200.0), 300.0 + uniform(-200.0, 200.0), 0.0, 0.0});
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        inst.prior.spatial.push_back(uniform(0.05, 1.0));
        total += inst.prior.spatial.back();
    }
    for (double& p : inst.prior.spatial) p /= total;
    // exact unit sum after the division
    double sum = 0.0;
    for (std::size_t s = 0; s + 1 < S; ++s) sum += inst.prior.spatial[s];
    inst.prior.spatial.back() = 1.0 - sum;

    const double fov = 1000.0;
    SensorParams sensor{100.0, 0.5, fov};
    CardinalityDistribution clutter;
    double clutter_rate = 0.0;
    if (spec.poisson) {
        inst.prior.rho = CardinalityDistribution::poisson(uniform(0.5, 3.0), spec.n_max);
        clutter_rate = uniform(0.5, 3.0);
        clutter = CardinalityDistribution::poisson(clutter_rate, spec.n_max);
    } else {
        const std::size_t n_max = pick(1, spec.n_max);
        std::vector<double> w(n_max + 1);
        for (double& v : w) v = uniform(0.0, 1.0);
        inst.prior.rho = CardinalityDistribution(std::move(w));
        std::vector<double> c(6);
        for (double& v : c) v = uniform(0.0, 1.0);
        clutter = CardinalityDistribution(std::move(c));
        clutter_rate = clutter.mean();
    }
    inst.model = range_bearing_model(sensor, 0.5, clutter_rate, ClutterGeometry::PolarUniform);
    inst.model.clutter_cardinality = clutter;
    inst.model.detection_probability = [](const State& x) {
        return 0.3 + 0.6 * (0.5 + 0.5 * std::sin(x.x / 37.0 + x.y / 53.0));
    };

    const std::size_t m = pick(0, spec.max_measurements);
    std::normal_distribution<double> dr(0.0, sensor.sigma_range);
    std::normal_distribution<double> db(0.0, 0.5 * sensor.sigma_bearing);
    for (std::size_t k = 0; k < m; ++k) {
        const Measurement h = observe(inst.prior.points[pick(0, S - 1)]);
        const double r = std::clamp(h.range + dr(rng), 1.0, fov - 1.0);
        inst.measurements.push_back(make_measurement(r, h.bearing + db(rng)));
    }

    const State& anchor = inst.prior.points[pick(0, S - 1)];
    const State& edge = inst.prior.points[pick(0, S - 1)];
    inst.regions = {region_all("all"), region_empty("empty"),
                    region_disc(anchor.x, anchor.y, uniform(20.0, 200.0), "disc"),
                    region_half_plane_x(edge.x + 1e-6, "west")};
    return inst;
}

bool close_enough(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

double relative_deviation(double a, double b, double abs_floor) {
    const double diff = std::abs(a - b);
    if (diff <= abs_floor) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

bool OracleCheckReport::passed(const OracleCheckConfig& c) const {
    return degenerate_ok && cphd_mean_dev <= c.cphd_tolerance && cphd_var_dev <= c.cphd_tolerance &&
           phd_mean_dev <= c.phd_tolerance && phd_var_dev <= c.phd_tolerance && reduction_dev <= c.phd_tolerance;
}

OracleCheckReport run_oracle_check(const OracleCheckConfig& config) {
    OracleCheckReport rep;
    std::mt19937_64 rng(config.seed);

    for (std::size_t i = 0; i < config.instances; ++i) {
        const OracleInstance inst = random_oracle_instance(config.cphd_spec, rng);
        const ExactPosterior post = posterior_exact(inst.prior, inst.measurements, inst.model);
        const CphdUpdateResult upd = cphd_update(inst.prior.intensity(), inst.prior.rho, inst.measurements, inst.model);
        for (const Region& region : inst.regions) {
            const ExactMoments ex = moments_exact(post, region);
            const RegionalStats st = cphd_regional_stats(upd.weights, upd.correctors, upd.intensity, region);
            rep.cphd_mean_dev = std::max(rep.cphd_mean_dev, relative_deviation(st.mean, ex.mean));
            rep.cphd_var_dev = std::max(rep.cphd_var_dev, relative_deviation(st.raw_variance, ex.variance));
            ++rep.comparisons;
        }
        ++rep.cphd_instances;
    }

    for (std::size_t i = 0; i < config.instances; ++i) {
        const OracleInstance inst = random_oracle_instance(config.poisson_spec, rng);
        const ExactPosterior post = posterior_exact(inst.prior, inst.measurements, inst.model);
        const WeightedParticleSet mu = inst.prior.intensity();
        const PhdConditionalWeights phd = phd_conditional_weights(mu, inst.measurements, inst.model);
        const WeightedParticleSet phd_post = phd_update_intensity(phd, mu);
        const CphdUpdateResult upd = cphd_update(mu, inst.prior.rho, inst.measurements, inst.model);
        for (const Region& region : inst.regions) {
            const ExactMoments ex = moments_exact(post, region);
            const RegionalStats p = phd_regional_stats(phd, phd_post, region);
            const RegionalStats c = cphd_regional_stats(upd.weights, upd.correctors, upd.intensity, region);
            rep.phd_mean_dev = std::max(rep.phd_mean_dev, relative_deviation(p.mean, ex.mean));
            rep.phd_var_dev = std::max(rep.phd_var_dev, relative_deviation(p.raw_variance, ex.variance));
            rep.reduction_dev = std::max({rep.reduction_dev, relative_deviation(c.mean, p.mean),
                                          relative_deviation(c.raw_variance, p.raw_variance)});
            ++rep.comparisons;
        }
        ++rep.poisson_instances;
    }

    // rho = delta_0 with no measurements: nothing anywhere.
    {
        OracleInstanceSpec spec = config.cphd_spec;
        spec.max_measurements = 0;
        OracleInstance inst = random_oracle_instance(spec, rng);
        inst.prior.rho = CardinalityDistribution::point_mass(0, inst.prior.rho.n_max());
        const ExactPosterior post = posterior_exact(inst.prior, inst.measurements, inst.model);
        // The intensity is zero; the CPHD corrector ratios only need its shape.
        std::vector<Particle> shape;
        for (std::size_t s = 0; s < inst.prior.points.size(); ++s)
            shape.push_back(Particle{inst.prior.spatial[s], inst.prior.points[s]});
        const CphdUpdateResult upd =
            cphd_update(WeightedParticleSet(std::move(shape)), inst.prior.rho, inst.measurements, inst.model);
        rep.degenerate_ok = true;
        for (const Region& region : inst.regions) {
            const ExactMoments ex = moments_exact(post, region);
            const RegionalStats st = cphd_regional_stats(upd.weights, upd.correctors, upd.intensity, region);
            rep.degenerate_ok = rep.degenerate_ok && st.mean == 0.0 && ex.mean == 0.0 && st.variance == 0.0 &&
                                std::abs(ex.variance) == 0.0;
        }
    }
    return rep;
}

// ---- Benchmark ----

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs two or more matching points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchResult run_benchmark(const BenchConfig& config) {
    if (config.repeats == 0) throw InvalidInput("benchmark needs at least one repeat");
    BenchResult result;
    const SensorParams sensor = superior_sensor();
    const Region fov = region_fov(sensor.fov_radius);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Instance {
        ObservationModel model;
        std::vector<Measurement> scan;
        WeightedParticleSet mu;
    };

    for (FilterKind kind : {FilterKind::Phd, FilterKind::Cphd}) {
        const std::size_t J = kind == FilterKind::Phd ? config.phd_particles : config.cphd_particles;
        std::vector<Instance> instances;
        for (std::size_t m : config.m_values) {
            // Worst case for the range gate: measurements and particles share one
            // range band, so every (particle, measurement) pair is evaluated.
            constexpr double kBand = 2000.0;
            constexpr double kSector = 0.3;
            std::vector<Measurement> scan;
            for (std::size_t k = 0; k < m; ++k)
                scan.push_back(make_measurement(kBand + sensor.sigma_range * (unit(rng) - 0.5),
                                                kSector * (2.0 * unit(rng) - 1.0)));
            std::vector<Particle> ps(J);
            for (std::size_t i = 0; i < J; ++i) {
                const double r = kBand + sensor.sigma_range * (unit(rng) - 0.5);
                const double b = kSector * (2.0 * unit(rng) - 1.0);
                ps[i] = Particle{5.0 / static_cast<double>(J), State{r * std::cos(b), r * std::sin(b), 0.0, 0.0}};
            }
            instances.push_back(Instance{range_bearing_model(sensor, 0.95, static_cast<double>(std::max<std::size_t>(m, 1)),
                                                             ClutterGeometry::AreaUniform),
                                         std::move(scan), WeightedParticleSet(std::move(ps))});
        }
        const CardinalityDistribution rho = CardinalityDistribution::poisson(5.0, config.n_max);

        // Sizes are interleaved within each repeat so slow spells of the machine
        // hit every m alike instead of skewing the fitted slope.
        std::vector<std::vector<double>> samples(instances.size());
        double sink = 0.0;
        for (std::size_t rep = 0; rep < config.repeats; ++rep) {
            for (std::size_t i = 0; i < instances.size(); ++i) {
                const Instance& in = instances[i];
                const auto start = std::chrono::steady_clock::now();
                if (kind == FilterKind::Phd) {
                    const PhdConditionalWeights cw = phd_conditional_weights(in.mu, in.scan, in.model);
                    const WeightedParticleSet post = phd_update_intensity(cw, in.mu);
                    sink += phd_regional_stats(cw, post, fov).variance;
                } else {
                    const CphdUpdateResult upd = cphd_update(in.mu, rho, in.scan, in.model);
                    sink += cphd_regional_stats(upd.weights, upd.correctors, upd.intensity, fov).variance;
                }
                const auto stop = std::chrono::steady_clock::now();
                samples[i].push_back(std::chrono::duration<double>(stop - start).count());
            }
        }
        if (!std::isfinite(sink)) throw DegenerateModel("benchmark produced a non-finite variance");

        std::vector<double> ms;
        std::vector<double> times;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            auto& s = samples[i];
            std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), s.end());
            const double median = s[s.size() / 2];
            const std::size_t m = config.m_values[i];
            result.rows.push_back(BenchRow{kind, m, J, median});
            if (m > 0) {
                ms.push_back(static_cast<double>(m));
                times.push_back(median);
            }
        }
        const double slope = ms.size() >= 2 ? fit_loglog_slope(ms, times) : 0.0;
        (kind == FilterKind::Phd ? result.phd_exponent : result.cphd_exponent) = slope;
    }
    return result;
}

} // namespace regvar
