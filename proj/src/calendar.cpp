#include "sptc/calendar.hpp"

#include <algorithm>
#include <chrono>
#include <iterator>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

namespace {

using namespace std::chrono;

/// (ISO year, ISO week) packed into one integer.
long iso_week_key(Date date) {
    const sys_days sd{date};
    const unsigned wd = weekday{sd}.iso_encoding();  // Monday = 1
    const sys_days thursday = sd + days{4 - static_cast<int>(wd)};
    const year_month_day th{thursday};
    const sys_days jan1{th.year() / January / 1};
    const long week = (thursday - jan1).count() / 7 + 1;
    return static_cast<int>(th.year()) * 100L + week;
}

long month_key(Date date) {
    return static_cast<int>(date.year()) * 100L + static_cast<unsigned>(date.month());
}

long quarter_key(Date date) {
    return static_cast<int>(date.year()) * 10L + (static_cast<unsigned>(date.month()) - 1) / 3;
}

template <typename Key>
std::vector<std::size_t> period_ends(std::span<const Date> dates, Key key) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (i + 1 == dates.size() || key(dates[i]) != key(dates[i + 1])) out.push_back(i);
    }
    return out;
}

}  // namespace

TradingFrequency parse_trading_frequency(std::string_view s) {
    if (s == "daily") return TradingFrequency::daily;
    if (s == "weekly") return TradingFrequency::weekly;
    if (s == "monthly") return TradingFrequency::monthly;
    throw InvalidInput(fmt::format("unknown trading frequency '{}'", s));
}

RenewingFrequency parse_renewing_frequency(std::string_view s) {
    if (s == "weekly") return RenewingFrequency::weekly;
    if (s == "monthly") return RenewingFrequency::monthly;
    if (s == "quarterly") return RenewingFrequency::quarterly;
    throw InvalidInput(fmt::format("unknown renewing frequency '{}'", s));
}

std::string_view to_string(TradingFrequency f) {
    switch (f) {
        case TradingFrequency::daily: return "daily";
        case TradingFrequency::weekly: return "weekly";
        case TradingFrequency::monthly: return "monthly";
    }
    return "?";
}

std::string_view to_string(RenewingFrequency f) {
    switch (f) {
        case RenewingFrequency::weekly: return "weekly";
        case RenewingFrequency::monthly: return "monthly";
        case RenewingFrequency::quarterly: return "quarterly";
    }
    return "?";
}

Calendar build_calendar(std::span<const Date> dates, TradingFrequency trading,
                        RenewingFrequency renewing) {
    if (dates.empty()) throw InvalidInput("calendar needs at least one date");
    Calendar cal;
    switch (renewing) {
        case RenewingFrequency::weekly: cal.renewal_days = period_ends(dates, iso_week_key); break;
        case RenewingFrequency::monthly: cal.renewal_days = period_ends(dates, month_key); break;
        case RenewingFrequency::quarterly: cal.renewal_days = period_ends(dates, quarter_key); break;
    }
    std::vector<std::size_t> trade;
    switch (trading) {
        case TradingFrequency::daily:
            trade.resize(dates.size());
            for (std::size_t i = 0; i < dates.size(); ++i) trade[i] = i;
            break;
        case TradingFrequency::weekly: trade = period_ends(dates, iso_week_key); break;
        case TradingFrequency::monthly: trade = period_ends(dates, month_key); break;
    }
    std::set_union(trade.begin(), trade.end(), cal.renewal_days.begin(), cal.renewal_days.end(),
                   std::back_inserter(cal.trading_days));
    return cal;
}

}  // namespace sptc
