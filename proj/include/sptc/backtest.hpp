#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sptc/calendar.hpp"
#include "sptc/market_data.hpp"
#include "sptc/portfolios.hpp"
#include "sptc/rebalance_solver.hpp"
#include "sptc/tc_smoothing.hpp"

namespace sptc {

enum class PortfolioKind { index_tracking, equal, entropy, diversity, diversity_dynamic };

PortfolioKind parse_portfolio_kind(std::string_view s);
std::string_view to_string(PortfolioKind k);

struct BacktestConfig {
    PortfolioKind kind{PortfolioKind::index_tracking};
    std::size_t d{100};
    TradingFrequency trading{TradingFrequency::daily};
    RenewingFrequency renewing{RenewingFrequency::quarterly};
    CostRates rates{};
    double initial_wealth{1000.0};
    /// p and delta for both diversity kinds; alpha only for `diversity`.
    DiversityConfig diversity{};
    /// Only for `diversity_dynamic`.
    SmoothingConfig smoothing{};

    void validate() const;
};

struct ConstituentList {
    std::vector<std::size_t> members;  // dataset stock indices, largest cap first
    std::size_t effective_from{0};
};

struct CapEntry {
    std::size_t stock{0};
    std::string_view id;
    double cap{0.0};
};

/// Top `d` entries by capitalization, ties broken by id ascending.
ConstituentList renew_constituents(std::span<const CapEntry> caps, std::size_t d, std::size_t day);
ConstituentList renew_constituents(const MarketDataset& data, std::size_t day, std::size_t d);

/// One row per trading day, t_0 included.
struct TradeRecord {
    std::size_t day{0};
    bool traded{false};
    bool renewal{false};
    double wealth_pre{0.0};
    double dividends{0.0};
    double transaction_costs{0.0};
    double wealth_post{0.0};
    /// Self-financing equation residual in currency.
    double self_financing_residual{0.0};
};

struct BacktestResult {
    std::vector<Date> dates;
    /// Post-trade wealth on trading days, holdings plus uninvested dividends
    /// on other days.
    std::vector<double> wealth;
    std::vector<double> cumulative_tc;
    /// Per day, dynamic runs only.
    std::vector<double> alpha;
    std::vector<TradeRecord> trades;
    /// Shadow constant-alpha0 portfolio of a dynamic run.
    std::vector<TradeRecord> baseline_trades;
    std::optional<double> qv;
    std::vector<std::string> diagnostics;
};

BacktestResult run_backtest(const BacktestConfig& config, const MarketDataset& data);

/// Cost- and dividend-free level sum_{i in list} S_i(t) * initial / sum S_i(t_0)
/// over the constituent list, renewed on `renewal_days`.
std::vector<double> capitalization_index(const MarketDataset& data, std::size_t d,
                                         std::span<const std::size_t> renewal_days,
                                         double initial_level);

/// Default moving-average window: one year of trading observations.
std::size_t default_delta(TradingFrequency trading);

}  // namespace sptc
