#pragma once

#include "regvar/core_types.hpp"
#include "regvar/oracle.hpp"
#include "regvar/region.hpp"
#include "regvar/simulation.hpp"
#include "regvar/smc_filter.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regvar {

/// Configuration problem; the message starts with the offending field.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& field, const std::string& what) : InvalidInput(field + ": " + what) {}
};

struct RegionSpec {
    enum class Kind { FullFov, Disc, DiscAroundTrack };
    Kind kind = Kind::FullFov;
    std::string name = "fov";
    double cx = 0.0;
    double cy = 0.0;
    /// One region per radius (Disc uses the first only).
    std::vector<double> radii;
    /// 1-based track index for DiscAroundTrack.
    std::size_t track = 1;
};

struct ResolveSettings {
    std::vector<double> times{51.0, 55.0, 59.0};
    std::size_t track = 1;
    std::vector<double> radii;  ///< defaults to 1..200 m in 1 m steps
};

struct ExperimentConfig {
    Scenario scenario = scenario_five_track();
    std::vector<FilterKind> filters{FilterKind::Cphd};
    FilterConfig filter;
    std::vector<std::uint64_t> seeds{1};
    std::vector<double> pd_values{0.95};
    std::vector<RegionSpec> regions{RegionSpec{}};
    ResolveSettings resolve;
    std::string output = "results.csv";
    /// Worker threads across runs; 0 uses the hardware concurrency.
    std::size_t threads = 0;

    void validate() const;
};

/// Parses the JSON configuration document; unknown keys are rejected.
[[nodiscard]] ExperimentConfig parse_experiment_config(std::string_view json_text);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::string& path);

/// "inferior" or "superior".
[[nodiscard]] SensorParams sensor_preset(std::string_view name);

/// `N` gives seeds 1..N; otherwise a comma separated list.
[[nodiscard]] std::vector<std::uint64_t> parse_seed_list(std::string_view text);
[[nodiscard]] std::vector<double> parse_double_list(std::string_view text);

struct ResultRow {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double t = 0.0;
    FilterKind filter = FilterKind::Cphd;
    std::string region;
    double pd = 0.0;
    double mean = 0.0;
    double var = 0.0;
    std::size_t true_count = 0;
};

struct AggregateRow {
    double t = 0.0;
    FilterKind filter = FilterKind::Cphd;
    std::string region;
    double pd = 0.0;
    double mean = 0.0;
    double var = 0.0;
    double true_count = 0.0;
    std::size_t n_runs = 0;
};

/// Runs every (pd, filter, seed) combination; rows are ordered by pd, filter,
/// seed, time and region regardless of the thread count. Runtime errors are
/// rethrown with the run and step attached.
[[nodiscard]] std::vector<ResultRow> run_filter_experiment(const ExperimentConfig& config);

/// Monte-Carlo averages per (pd, filter, region, t).
[[nodiscard]] std::vector<AggregateRow> aggregate_rows(std::span<const ResultRow> rows);

void write_rows_csv(std::ostream& os, std::span<const ResultRow> rows);
void write_aggregates_csv(std::ostream& os, std::span<const AggregateRow> rows);

// ---- Resolution study ----

struct ResolutionRow {
    std::uint64_t seed = 0;
    std::string sensor;
    double t = 0.0;
    double radius = 0.0;
    double mean = 0.0;
    double var = 0.0;
    std::size_t true_count = 0;
};

/// Runs one filter (config.filters.front()) up to the last requested time
/// and evaluates discs of growing radius around the true position of the
/// configured track. Uses config.pd_values.front() as detection probability.
[[nodiscard]] std::vector<ResolutionRow> run_resolution(const ExperimentConfig& config, const SensorParams& sensor,
                                                        const std::string& sensor_label, std::uint64_t seed);

void write_resolution_csv(std::ostream& os, std::span<const ResolutionRow> rows);

struct DipCriteria {
    /// Both flanking maxima must exceed the minimum by at least this much.
    double prominence = 0.1;
    double mean_low = 0.8;
    double mean_high = 1.2;
};

/// Index of a local minimum of `var` with mean inside [mean_low, mean_high]
/// and a local maximum at least `prominence` higher on each side.
[[nodiscard]] std::optional<std::size_t> find_resolution_dip(std::span<const double> var, std::span<const double> mean,
                                                             const DipCriteria& criteria = {});

// ---- Oracle self-check ----

struct OracleInstance {
    DiscretePrior prior;
    ObservationModel model;
    std::vector<Measurement> measurements;
    std::vector<Region> regions;
};

/// Random discrete instance: points near (600, 300) m, state-dependent p_d,
/// wide range-bearing likelihood, polar-uniform clutter over 1000 m.
/// With `poisson_rates` the prior and clutter cardinalities are truncated
/// Poisson laws; otherwise they are arbitrary.
struct OracleInstanceSpec {
    std::size_t max_points = 4;
    std::size_t n_max = 4;
    std::size_t max_measurements = 3;
    bool poisson = false;
};

[[nodiscard]] OracleInstance random_oracle_instance(const OracleInstanceSpec& spec, std::mt19937_64& rng);

/// |a - b| <= rel * max(|a|, |b|) + abs_floor
/// Relative deviations treat |a - b| <= abs_floor as agreement so that
/// quantities that are mathematically zero (empty regions) compare equal.
[[nodiscard]] bool close_enough(double a, double b, double rel, double abs_floor = 1e-15);
[[nodiscard]] double relative_deviation(double a, double b, double abs_floor = 1e-15);

struct OracleCheckConfig {
    std::size_t instances = 50;
    std::uint64_t seed = 1;
    OracleInstanceSpec cphd_spec{4, 4, 3, false};
    OracleInstanceSpec poisson_spec{4, 80, 3, true};
    double cphd_tolerance = 1e-9;
    double phd_tolerance = 1e-6;
};

struct OracleCheckReport {
    std::size_t cphd_instances = 0;
    std::size_t poisson_instances = 0;
    std::size_t comparisons = 0;
    double cphd_mean_dev = 0.0;
    double cphd_var_dev = 0.0;
    double phd_mean_dev = 0.0;
    double phd_var_dev = 0.0;
    double reduction_dev = 0.0;
    bool degenerate_ok = false;

    [[nodiscard]] bool passed(const OracleCheckConfig& config) const;
};

/// Compares CPHD against the exact oracle on arbitrary i.i.d. instances,
/// PHD against the oracle and CPHD against PHD on Poisson instances, and the
/// empty case rho = delta_0, m = 0. Deviations are relative.
[[nodiscard]] OracleCheckReport run_oracle_check(const OracleCheckConfig& config);

// ---- Benchmark ----

struct BenchConfig {
    std::vector<std::size_t> m_values{8, 16, 32, 64};
    std::size_t cphd_particles = 16;
    std::size_t phd_particles = 20000;
    std::size_t repeats = 31;
    std::size_t n_max = 20;
    std::uint64_t seed = 1;
};

struct BenchRow {
    FilterKind filter = FilterKind::Cphd;
    std::size_t m = 0;
    std::size_t particles = 0;
    double median_seconds = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    double phd_exponent = 0.0;
    double cphd_exponent = 0.0;
};

/// Median wall time of one data update plus full-FoV regional statistics on
/// synthetic scans of m measurements; exponents from a log-log least-squares fit.
[[nodiscard]] BenchResult run_benchmark(const BenchConfig& config);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace regvar
