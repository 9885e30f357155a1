#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sptc/backtest.hpp"
#include "sptc/market_data.hpp"

namespace sptc {

struct YearlyReturn {
    int year{0};
    double value{0.0};
};

/// Simple returns of the wealth path over complete calendar years. The first
/// year counts only if the data starts in its first week, the last one only
/// if the data reaches its final week.
std::vector<YearlyReturn> yearly_returns(std::span<const Date> dates, std::span<const double> wealth);

/// Yield used for `year`: the latest observation on or before `start`, else
/// the first observation inside that year. Zero for an empty series.
double risk_free_for_year(std::span<const RiskFreePoint> series, int year, Date start);

struct Metrics {
    std::vector<YearlyReturn> yearly;
    std::optional<double> yearly_return;
    std::optional<double> excess_return;
    std::optional<double> std_dev;
    std::optional<double> sharpe;
    double terminal_wealth{0.0};
    double terminal_tc{0.0};
    std::optional<double> qv;
};

/// Table metrics for one run. `benchmark` (usually the matching index
/// tracking run) supplies the excess return.
Metrics summarize(const BacktestResult& result, std::span<const RiskFreePoint> risk_free,
                  const BacktestResult* benchmark = nullptr);

}  // namespace sptc
