#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sptc/market_data.hpp"

namespace sptc {

enum class TradingFrequency { daily, weekly, monthly };
enum class RenewingFrequency { weekly, monthly, quarterly };

TradingFrequency parse_trading_frequency(std::string_view s);
RenewingFrequency parse_renewing_frequency(std::string_view s);
std::string_view to_string(TradingFrequency f);
std::string_view to_string(RenewingFrequency f);

/// Day indices into the date sequence, ascending.
struct Calendar {
    std::vector<std::size_t> trading_days;
    std::vector<std::size_t> renewal_days;
};

/// Weekly periods are ISO weeks; months and quarters are calendar ones. The
/// last available date of each period is its trading/renewal day, and every
/// renewal day is also a trading day.
Calendar build_calendar(std::span<const Date> dates, TradingFrequency trading,
                        RenewingFrequency renewing);

}  // namespace sptc
