#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sptc/backtest.hpp"
#include "sptc/synthetic_market.hpp"

namespace sptc {

/// Manifest problem, prefixed with the JSON path of the offending field.
class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridPoint {
    std::string key;
    BacktestConfig config;
};

/// A run description: where the data comes from and the configuration grid.
///
/// The file is JSON. `grid` is a list of blocks; every field of a block may
/// be a scalar or a list, and each block expands to the cartesian product of
/// its lists. Diversity fields only expand for the diversity kinds.
struct RunManifest {
    std::optional<std::filesystem::path> market;
    std::optional<SyntheticParams> synthetic;
    std::optional<std::filesystem::path> risk_free;
    std::optional<std::filesystem::path> out;
    std::size_t jobs{1};
    std::vector<GridPoint> grid;
};

/// Relative paths resolve against `base_dir`.
RunManifest parse_manifest(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunManifest load_manifest(const std::filesystem::path& path);

/// Stable directory name for a configuration.
std::string config_key(const BacktestConfig& config);

}  // namespace sptc
