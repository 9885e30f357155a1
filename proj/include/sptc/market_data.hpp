#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sptc {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws DataError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// One stock's life in the dataset. Capitalizations cover the contiguous day
/// range [first_day, first_day + caps.size()); returns cover the same range
/// plus the delisting day when there is one.
struct StockSeries {
    std::string id;
    std::size_t first_day{0};
    std::vector<double> caps;
    std::vector<double> returns;
    std::optional<std::size_t> delisting_day;

    std::size_t cap_end() const { return first_day + caps.size(); }
    bool has_cap(std::size_t day) const { return day >= first_day && day < cap_end(); }
    bool has_return(std::size_t day) const {
        return day >= first_day && day < first_day + returns.size();
    }
    double cap(std::size_t day) const { return caps[day - first_day]; }
    double total_return(std::size_t day) const { return returns[day - first_day]; }
};

/// Immutable market history: dates t_1..t_N and one series per stock, sorted
/// by stock id.
class MarketDataset {
public:
    MarketDataset(std::vector<Date> dates, std::vector<StockSeries> stocks);

    std::span<const Date> dates() const { return dates_; }
    std::size_t num_days() const { return dates_.size(); }
    std::span<const StockSeries> stocks() const { return stocks_; }
    std::size_t num_stocks() const { return stocks_.size(); }
    const StockSeries& stock(std::size_t index) const { return stocks_[index]; }

private:
    std::vector<Date> dates_;
    std::vector<StockSeries> stocks_;
};

struct DayRates {
    double dividend_rate{0.0};
    double realised_rate{0.0};
};

/// Splits a day's total return into the cash-dividend part and the price part.
/// `cap_now` must be empty exactly when the stock delists that day.
DayRates decompose_return(double cap_prev, std::optional<double> cap_now, double total_return,
                          bool delisted_today);

/// Rates of `stock` on `day` under the delisting rules: decomposed on days
/// with data, zero on days after its delisting day.
DayRates day_rates(const MarketDataset& data, std::size_t stock, std::size_t day);

/// Per-day rates of one stock over an accrual window, oldest first.
struct ReturnDecomposition {
    std::vector<double> dividend_rate;
    std::vector<double> realised_rate;

    std::size_t size() const { return realised_rate.size(); }
};

/// Zeroes both rates strictly after `delisting_offset` (an index into the
/// window). Offsets past the window leave it unchanged.
ReturnDecomposition post_delisting_zeroing(ReturnDecomposition decomposition,
                                           std::size_t delisting_offset);

/// Rates of `stock` over the days (from_day, to_day]. The stock must hold a
/// capitalization on from_day. Data gaps inside the window are errors.
ReturnDecomposition window_rates(const MarketDataset& data, std::size_t stock,
                                 std::size_t from_day, std::size_t to_day);

/// psi_i(t_l-) = psi_i(t_{l-n}) * prod_k (1 + r^R_i(t_k)).
std::vector<double> accrue_between_trades(std::span<const double> holdings_at_last_trade,
                                          std::span<const ReturnDecomposition> windows);

/// Cash dividends collected over the window; they earn nothing until the
/// next trade.
double accumulate_dividends(std::span<const double> holdings_at_last_trade,
                            std::span<const ReturnDecomposition> windows);

struct AccrualResult {
    std::vector<double> holdings_pre_trade;
    double dividends_accumulated{0.0};
};

AccrualResult accrue_window(std::span<const double> holdings_at_last_trade,
                            std::span<const ReturnDecomposition> windows);

/// Day-by-day form of the two accrual formulas. Applying every day of a
/// window reproduces accrue_between_trades/accumulate_dividends.
struct PositionAccrual {
    double holding{0.0};
    double dividends{0.0};

    void apply(DayRates rates) {
        dividends += holding * rates.dividend_rate;
        holding *= 1.0 + rates.realised_rate;
    }
};

/// Loads the `date,stock_id,market_cap,total_return,delisted` CSV.
MarketDataset load_market_csv(const std::filesystem::path& path);
MarketDataset parse_market_csv(std::string_view text);

/// Serializes with 17 significant digits; parse_market_csv round-trips it exactly.
std::string to_market_csv(const MarketDataset& data);

struct RiskFreePoint {
    Date date;
    double annual_yield{0.0};
};

/// `date,annual_yield`, dates strictly increasing.
std::vector<RiskFreePoint> load_risk_free_csv(const std::filesystem::path& path);
std::vector<RiskFreePoint> parse_risk_free_csv(std::string_view text);

}  // namespace sptc
