#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdmc/config.hpp"
#include "sdmc/estimator.hpp"

namespace sdmc {

// Named scalar time series; every quantity requested in a config becomes one
// or more of these (matrix requests contribute one series per entry).
struct QuantitySeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<ValueEstimate>> values;  // [time][quantity]
};

struct Table {
    std::vector<std::string> columns;  // excluding the leading time column
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
};

struct CompareSummary {
    std::vector<double> times;
    std::vector<double> max_abs_dev;      // stochastic vs oracle, per time
    std::vector<double> max_dev_ratio;    // |dev| / max(se, floor), per time
    std::vector<double> analytic_max_abs_dev;  // analytic vs oracle, when available
    double worst_ratio = 0.0;
    double worst_abs_dev = 0.0;
    std::string worst_quantity;
    double worst_time = 0.0;
    bool passed = true;
};

struct RunResult {
    ExperimentConfig config;
    std::optional<ReducedSeries> stochastic;
    std::optional<ReducedSeries> oracle;
    std::optional<ReducedSeries> analytic;
    std::optional<QuantitySeries> stochastic_values;
    std::optional<QuantitySeries> oracle_values;
    std::optional<QuantitySeries> analytic_values;
    std::optional<CompareSummary> compare;
    std::uint64_t trajectories_used = 0;
    std::uint64_t discarded = 0;
    double wall_seconds = 0.0;

    nlohmann::json manifest() const;
};

// Stochastic ensemble only; trajectories are processed in fixed blocks of
// kTrajectoryBlock and merged in index order, so the result does not depend on
// the worker count.
inline constexpr std::size_t kTrajectoryBlock = 64;

struct EnsembleResult {
    ReducedSeries series;
    std::uint64_t used = 0;
    std::uint64_t discarded = 0;
};

EnsembleResult run_ensemble(const ExperimentConfig& config, const EstimateRequests& requests);

// Series of exact states reduced to the requested sites and pairs.
ReducedSeries run_oracle(const ExperimentConfig& config, const EstimateRequests& requests);
ReducedSeries run_analytic(const ExperimentConfig& config, const EstimateRequests& requests);

// Sites and pairs that the config's requests need estimated.
EstimateRequests estimate_requests(const OutputRequests& requests);

QuantitySeries tabulate(const ReducedSeries& series, const OutputRequests& requests);
Table to_table(const QuantitySeries& values);
Table compare_table(const CompareSummary& summary);
CompareSummary compare_series(const QuantitySeries& stochastic, const QuantitySeries& oracle,
                              const QuantitySeries* analytic, double sigma, double floor);

// Validates, executes the configured mode, and fills the run result.
// Throws ConfigError/ValidationError on bad configs and TrajectoryBlowUp when
// the abort policy trips.
RunResult run(const ExperimentConfig& config);

// Tab-separated, header row, shortest round-trip float formatting.
void write_table(const Table& table, const std::filesystem::path& path);
std::string format_table(const Table& table);
// Writes <mode>.tsv files and manifest.json into `directory`; returns the paths.
std::vector<std::filesystem::path> emit_tables(const RunResult& result, const std::filesystem::path& directory);

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace sdmc
