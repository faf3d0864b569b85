// regvar: simulation, filtering and self-checks for regional target-count statistics.

#include "regvar/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace {

using namespace regvar;

enum Exit : int { kOk = 0, kConfigError = 1, kToleranceBreach = 2, kRuntimeFailure = 3 };

struct Overrides {
    std::string config;
    std::string filter;
    std::string seeds;
    std::string pd;
    std::string out;
    std::string sensor;
    std::size_t n_max = 0;
    std::size_t particles_per_target = 0;
    std::size_t threads = 0;
    bool threads_set = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON experiment configuration");
    cmd->add_option("--filter", o.filter, "phd, cphd or both (comma separated)");
    cmd->add_option("--seeds", o.seeds, "seed count N (seeds 1..N) or comma separated list");
    cmd->add_option("--pd", o.pd, "comma separated detection probabilities");
    cmd->add_option("--out", o.out, "output CSV path");
    cmd->add_option("--sensor", o.sensor, "superior or inferior")->check(CLI::IsMember({"superior", "inferior"}));
    cmd->add_option("--nmax", o.n_max, "largest CPHD target count");
    cmd->add_option("--particles-per-target", o.particles_per_target, "resampling budget per unit mass");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentConfig build_config(const Overrides& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
    if (!o.filter.empty()) {
        c.filters.clear();
        std::stringstream ss(o.filter);
        std::string item;
        while (std::getline(ss, item, ',')) c.filters.push_back(parse_filter_kind(item));
    }
    if (!o.seeds.empty()) c.seeds = parse_seed_list(o.seeds);
    if (!o.pd.empty()) c.pd_values = parse_double_list(o.pd);
    if (!o.out.empty()) c.output = o.out;
    if (!o.sensor.empty()) c.scenario.sensor = sensor_preset(o.sensor);
    if (o.n_max > 0) c.filter.n_max = o.n_max;
    if (o.particles_per_target > 0) c.filter.particles_per_target = o.particles_per_target;
    if (o.threads > 0) c.threads = o.threads;
    c.validate();
    return c;
}

std::string sibling(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("out", "cannot write '" + path + "'");
    return os;
}

int cmd_simulate(const ExperimentConfig& c) {
    Scenario s = c.scenario;
    s.p_d = c.pd_values.front();
    const std::uint64_t seed = c.seeds.front();
    const GroundTruth truth = generate_truth(s, seed);
    const auto scans = generate_measurements(truth, s, seed);
    auto truth_os = open_out(c.output);
    truth_os << std::setprecision(12);
    write_truth_csv(truth_os, truth);
    const std::string meas_path = sibling(c.output, "_measurements");
    auto meas_os = open_out(meas_path);
    meas_os << std::setprecision(12);
    write_measurements_csv(meas_os, truth, scans);
    std::cout << "wrote " << c.output << " and " << meas_path << '\n';
    return kOk;
}

// Time-averaged statistics per (filter, pd, region) from the aggregates.
void print_summary(const std::vector<AggregateRow>& agg) {
    std::map<std::tuple<std::string, double, std::string>, std::array<double, 3>> acc;
    for (const AggregateRow& a : agg) {
        auto& v = acc[{std::string(to_string(a.filter)), a.pd, a.region}];
        v[0] += a.mean;
        v[1] += a.var;
        v[2] += 1.0;
    }
    std::cout << "filter,pd,region,time_avg_mean,time_avg_var\n";
    for (const auto& [key, v] : acc)
        std::cout << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << v[0] / v[2]
                  << ',' << v[1] / v[2] << '\n';
}

int cmd_filter(const ExperimentConfig& c) {
    const auto rows = run_filter_experiment(c);
    const auto agg = aggregate_rows(rows);
    auto os = open_out(c.output);
    write_rows_csv(os, rows);
    const std::string agg_path = sibling(c.output, "_aggregates");
    auto aos = open_out(agg_path);
    write_aggregates_csv(aos, agg);
    print_summary(agg);
    std::cout << "wrote " << rows.size() << " rows to " << c.output << " and " << agg.size() << " to " << agg_path
              << '\n';
    return kOk;
}

int cmd_resolve(const ExperimentConfig& c, const std::string& sensor_flag) {
    std::vector<std::pair<std::string, SensorParams>> sensors;
    if (sensor_flag.empty())
        sensors = {{"superior", superior_sensor()}, {"inferior", inferior_sensor()}};
    else
        sensors = {{sensor_flag, sensor_preset(sensor_flag)}};
    std::vector<ResolutionRow> all;
    std::cout << "sensor,seed,t,dip_radius\n";
    for (const auto& [label, params] : sensors)
        for (std::uint64_t seed : c.seeds) {
            const auto rows = run_resolution(c, params, label, seed);
            for (double t : c.resolve.times) {
                std::vector<double> var, mean, radius;
                for (const auto& r : rows)
                    if (r.t == t) {
                        var.push_back(r.var);
                        mean.push_back(r.mean);
                        radius.push_back(r.radius);
                    }
                const auto dip = find_resolution_dip(var, mean);
                std::cout << label << ',' << seed << ',' << t << ',' << (dip ? std::to_string(radius[*dip]) : "none")
                          << '\n';
            }
            all.insert(all.end(), rows.begin(), rows.end());
        }
    auto os = open_out(c.output);
    write_resolution_csv(os, all);
    std::cout << "wrote " << all.size() << " rows to " << c.output << '\n';
    return kOk;
}

int cmd_oracle_check(std::size_t instances, std::uint64_t seed) {
    OracleCheckConfig oc;
    oc.instances = instances;
    oc.seed = seed;
    const OracleCheckReport r = run_oracle_check(oc);
    std::cout << std::setprecision(3) << "instances: " << r.cphd_instances << " i.i.d., " << r.poisson_instances
              << " Poisson; " << r.comparisons << " regional comparisons\n"
              << "max rel. deviation CPHD vs oracle: mean " << r.cphd_mean_dev << ", var " << r.cphd_var_dev
              << " (tol " << oc.cphd_tolerance << ")\n"
              << "max rel. deviation PHD vs oracle:  mean " << r.phd_mean_dev << ", var " << r.phd_var_dev
              << " (tol " << oc.phd_tolerance << ")\n"
              << "max rel. deviation CPHD vs PHD (Poisson): " << r.reduction_dev << " (tol " << oc.phd_tolerance
              << ")\n"
              << "empty prior, no measurements: " << (r.degenerate_ok ? "exact" : "MISMATCH") << '\n';
    const bool ok = r.passed(oc);
    std::cout << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kToleranceBreach;
}

int cmd_bench(const BenchConfig& bc) {
    const BenchResult r = run_benchmark(bc);
    std::cout << "filter,m,particles,median_seconds\n" << std::setprecision(6);
    for (const BenchRow& row : r.rows)
        std::cout << to_string(row.filter) << ',' << row.m << ',' << row.particles << ',' << row.median_seconds
                  << '\n';
    std::cout << "fitted exponent phd: " << r.phd_exponent << "\nfitted exponent cphd: " << r.cphd_exponent << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regional mean and variance of the target number for PHD/CPHD filters"};
    app.require_subcommand(1);

    Overrides o;
    auto* simulate = app.add_subcommand("simulate", "write ground truth and measurements of one run");
    auto* filter = app.add_subcommand("filter", "Monte-Carlo filter runs with regional statistics");
    auto* sweep = app.add_subcommand("sweep-pd", "filter runs over several detection probabilities");
    auto* resolve = app.add_subcommand("resolve", "variance against disc radius around a track");
    auto* oracle = app.add_subcommand("oracle-check", "compare the updates with exact enumeration");
    auto* bench = app.add_subcommand("bench", "update time against the number of measurements");
    for (auto* cmd : {simulate, filter, sweep, resolve}) add_common(cmd, o);

    std::size_t oracle_instances = 50;
    std::uint64_t oracle_seed = 1;
    oracle->add_option("--instances", oracle_instances, "random instances per family");
    oracle->add_option("--seed", oracle_seed, "instance generator seed");

    BenchConfig bc;
    std::string m_list;
    bench->add_option("--m", m_list, "comma separated measurement counts");
    bench->add_option("--repeats", bc.repeats, "timed repetitions per point");
    bench->add_option("--cphd-particles", bc.cphd_particles, "particles in the CPHD benchmark");
    bench->add_option("--phd-particles", bc.phd_particles, "particles in the PHD benchmark");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (oracle->parsed()) return cmd_oracle_check(oracle_instances, oracle_seed);
        if (bench->parsed()) {
            if (!m_list.empty()) {
                bc.m_values.clear();
                for (double v : parse_double_list(m_list)) bc.m_values.push_back(static_cast<std::size_t>(v));
            }
            return cmd_bench(bc);
        }
        if (sweep->parsed() && o.pd.empty()) o.pd = "0.95,0.9,0.85";
        if (resolve->parsed() && o.out.empty() && o.config.empty()) o.out = "resolution.csv";
        ExperimentConfig c = build_config(o);
        if (simulate->parsed()) return cmd_simulate(c);
        if (resolve->parsed()) return cmd_resolve(c, o.sensor);
        return cmd_filter(c);
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}
