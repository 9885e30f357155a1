#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "sptc/market_data.hpp"

namespace sptc {

/// Knobs of the synthetic universe. Rates and volatilities are annualized
/// (252 trading days), probabilities and hazards are per stock-day.
struct SyntheticParams {
    std::uint64_t seed{1};
    std::size_t n_stocks{100};
    std::size_t n_days{2500};
    Date start{std::chrono::year{1962}, std::chrono::month{1}, std::chrono::day{2}};
    double drift_min{0.02};
    double drift_max{0.15};
    double vol_min{0.15};
    double vol_max{0.45};
    double dividend_prob{0.016};
    double yield_min{0.002};
    double yield_max{0.008};
    double delist_hazard{2e-5};
    double delist_return_min{-0.6};
    double delist_return_max{0.1};
    double cap_min{1e8};
    double cap_max{1e11};
    /// A delisted stock's slot is taken by a new listing the same day, so the
    /// number of listed stocks stays n_stocks.
    bool replace_delisted{true};

    void validate() const;
};

/// Deterministic universe on consecutive weekdays from `start`.
///
/// Random numbers come from std::mt19937_64 (bit-exact by the standard);
/// uniforms are its top 53 bits, normals use Box-Muller, so the draw sequence
/// does not depend on the standard library's distributions. Draws run slot by
/// slot, and within a slot stock by stock, day by day.
///
/// Each stock-day draws a price return g and an optional dividend yield q;
/// caps move by (1 + g) and the total return is g + q, so decompose_return
/// recovers q and g.
MarketDataset generate_market(const SyntheticParams& params);

/// Hex SHA-256 of the serialized CSV.
std::string dataset_digest(const MarketDataset& data);

}  // namespace sptc
