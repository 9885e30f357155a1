#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sptc/backtest.hpp"
#include "sptc/manifest.hpp"
#include "sptc/metrics.hpp"

namespace sptc {

/// Shortest text that carries 17 significant digits.
std::string format_number(double x);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string metrics_json(const std::string& key, const BacktestConfig& config, const Metrics& m);
/// date,wealth,cumulative_tc and alpha for dynamic runs.
std::string wealth_csv(const BacktestResult& result);

struct PointOutcome {
    std::string key;
    BacktestConfig config;
    std::optional<Metrics> metrics;
    std::string error;

    bool ok() const { return metrics.has_value(); }
};

/// Rows are metrics, columns are configurations in grid order. Missing
/// values are empty cells.
std::string summary_csv(std::span<const PointOutcome> points);
std::string failures_json(std::span<const PointOutcome> points);

struct RunOptions {
    std::filesystem::path out;
    std::size_t jobs{1};
};

struct GridReport {
    std::vector<PointOutcome> points;
    /// Index-tracking runs that only served as benchmarks.
    std::vector<PointOutcome> benchmarks;

    std::size_t failures() const;
    int exit_status() const { return failures() == 0 ? 0 : 1; }
};

/// Market data named by the manifest, loaded or generated.
MarketDataset manifest_market(const RunManifest& manifest);

/// Runs every grid point on a pool of `jobs` workers.
///
/// Layout under options.out: <key>/metrics.json and <key>/wealth.csv per
/// point, benchmarks/<key>/ for benchmark-only runs, cap_index/ with one
/// capitalization index per (d, renewing) pair, summary.csv and
/// failures.json. The excess return of each point is measured against the
/// index-tracking run with the same d, frequencies and cost rates, which is
/// run as well if the grid lacks it. A failing point does not stop the others.
GridReport run_grid(const RunManifest& manifest, const MarketDataset& data,
                    std::span<const RiskFreePoint> risk_free, const RunOptions& options);

}  // namespace sptc
