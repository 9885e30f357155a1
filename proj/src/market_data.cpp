#include "sptc/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    double value = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        ++line_no;
        const auto line = trim(text.substr(start, pos - start));
        if (!line.empty()) fn(line_no, line);
        start = pos + 1;
    }
}

}  // namespace

Date parse_date(std::string_view text) {
    auto number = [&](std::size_t off, std::size_t len) -> int {
        int v = 0;
        auto [ptr, ec] = std::from_chars(text.data() + off, text.data() + off + len, v);
        if (ec != std::errc() || ptr != text.data() + off + len) {
            throw DataError(fmt::format("bad date '{}'", text));
        }
        return v;
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw DataError(fmt::format("bad date '{}', expected YYYY-MM-DD", text));
    }
    const Date d{std::chrono::year{number(0, 4)},
                 std::chrono::month{static_cast<unsigned>(number(5, 2))},
                 std::chrono::day{static_cast<unsigned>(number(8, 2))}};
    if (!d.ok()) throw DataError(fmt::format("invalid calendar date '{}'", text));
    return d;
}

std::string format_date(Date date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                       static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

MarketDataset::MarketDataset(std::vector<Date> dates, std::vector<StockSeries> stocks)
    : dates_(std::move(dates)), stocks_(std::move(stocks)) {
    if (dates_.empty()) throw DataError("dataset has no dates");
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw DataError(fmt::format("dates not strictly increasing at {}",
                                        format_date(dates_[i])));
        }
    }
    std::sort(stocks_.begin(), stocks_.end(),
              [](const StockSeries& a, const StockSeries& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < stocks_.size(); ++i) {
        const auto& s = stocks_[i];
        if (i > 0 && stocks_[i - 1].id == s.id) {
            throw DataError(fmt::format("duplicate stock id {}", s.id));
        }
        if (s.caps.empty()) throw DataError(fmt::format("stock {} has no capitalization", s.id));
        const std::size_t expected = s.caps.size() + (s.delisting_day ? 1 : 0);
        if (s.returns.size() != expected) {
            throw DataError(fmt::format("stock {} has {} returns for {} days", s.id,
                                        s.returns.size(), expected));
        }
        if (s.delisting_day && *s.delisting_day != s.cap_end()) {
            throw DataError(fmt::format("stock {} delisting day is not after its last cap", s.id));
        }
        if (s.first_day + s.returns.size() > dates_.size()) {
            throw DataError(fmt::format("stock {} extends past the last date", s.id));
        }
        for (double c : s.caps) {
            if (!(c > 0.0) || !std::isfinite(c)) {
                throw DataError(fmt::format("stock {} has a nonpositive capitalization", s.id));
            }
        }
    }
}

DayRates decompose_return(double cap_prev, std::optional<double> cap_now, double total_return,
                          bool delisted_today) {
    if (!(cap_prev > 0.0)) {
        throw InvalidInput(fmt::format("previous capitalization must be positive, got {}",
                                       cap_prev));
    }
    if (cap_now.has_value() == delisted_today) {
        throw InvalidInput("current capitalization must be absent exactly on the delisting day");
    }
    if (delisted_today) return {0.0, total_return};
    const double dividend = std::max(1.0 + total_return - *cap_now / cap_prev, 0.0);
    return {dividend, total_return - dividend};
}

ReturnDecomposition post_delisting_zeroing(ReturnDecomposition decomposition,
                                           std::size_t delisting_offset) {
    for (std::size_t k = delisting_offset + 1; k < decomposition.size(); ++k) {
        decomposition.dividend_rate[k] = 0.0;
        decomposition.realised_rate[k] = 0.0;
    }
    return decomposition;
}

DayRates day_rates(const MarketDataset& data, std::size_t stock, std::size_t day) {
    const StockSeries& s = data.stock(stock);
    if (s.delisting_day) {
        if (day > *s.delisting_day) return {};
        if (day == *s.delisting_day) {
            return decompose_return(s.cap(day - 1), std::nullopt, s.total_return(day), true);
        }
    }
    if (day == 0 || !s.has_cap(day) || !s.has_cap(day - 1)) {
        throw DataError(fmt::format("stock {} has no data on {}", s.id,
                                    format_date(data.dates()[day])));
    }
    return decompose_return(s.cap(day - 1), s.cap(day), s.total_return(day), false);
}

ReturnDecomposition window_rates(const MarketDataset& data, std::size_t stock,
                                 std::size_t from_day, std::size_t to_day) {
    const StockSeries& s = data.stock(stock);
    if (to_day <= from_day || to_day >= data.num_days()) {
        throw InvalidInput(fmt::format("bad accrual window ({}, {}]", from_day, to_day));
    }
    if (!s.has_cap(from_day)) {
        throw DataError(fmt::format("stock {} has no capitalization on {}", s.id,
                                    format_date(data.dates()[from_day])));
    }
    ReturnDecomposition out;
    out.dividend_rate.assign(to_day - from_day, 0.0);
    out.realised_rate.assign(to_day - from_day, 0.0);
    std::optional<std::size_t> delist_offset;
    for (std::size_t day = from_day + 1; day <= to_day; ++day) {
        const std::size_t k = day - from_day - 1;
        DayRates r;
        if (s.delisting_day && day == *s.delisting_day) {
            r = decompose_return(s.cap(day - 1), std::nullopt, s.total_return(day), true);
            delist_offset = k;
        } else if (s.delisting_day && day > *s.delisting_day) {
            break;
        } else if (s.has_cap(day)) {
            r = decompose_return(s.cap(day - 1), s.cap(day), s.total_return(day), false);
        } else {
            throw DataError(fmt::format("stock {} has no data on {}", s.id,
                                        format_date(data.dates()[day])));
        }
        out.dividend_rate[k] = r.dividend_rate;
        out.realised_rate[k] = r.realised_rate;
    }
    if (delist_offset) out = post_delisting_zeroing(std::move(out), *delist_offset);
    return out;
}

namespace {

void check_windows(std::span<const double> holdings, std::span<const ReturnDecomposition> windows) {
    if (holdings.size() != windows.size()) {
        throw InvalidInput(fmt::format("{} holdings but {} rate windows", holdings.size(),
                                       windows.size()));
    }
    if (windows.empty()) return;
    const std::size_t n = windows.front().size();
    if (n == 0) throw InvalidInput("accrual window must cover at least one day");
    for (const auto& w : windows) {
        if (w.size() != n || w.dividend_rate.size() != n) {
            throw InvalidInput("accrual windows differ in length");
        }
    }
}

}  // namespace

std::vector<double> accrue_between_trades(std::span<const double> holdings_at_last_trade,
                                          std::span<const ReturnDecomposition> windows) {
    check_windows(holdings_at_last_trade, windows);
    std::vector<double> out(holdings_at_last_trade.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double growth = 1.0;
        for (double rr : windows[i].realised_rate) growth *= 1.0 + rr;
        out[i] = holdings_at_last_trade[i] * growth;
    }
    return out;
}

double accumulate_dividends(std::span<const double> holdings_at_last_trade,
                            std::span<const ReturnDecomposition> windows) {
    check_windows(holdings_at_last_trade, windows);
    double total = 0.0;
    for (std::size_t i = 0; i < holdings_at_last_trade.size(); ++i) {
        const auto& w = windows[i];
        double per_unit = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            double growth = 1.0;
            for (std::size_t u = 0; u < k; ++u) growth *= 1.0 + w.realised_rate[u];
            per_unit += w.dividend_rate[k] * growth;
        }
        total += holdings_at_last_trade[i] * per_unit;
    }
    return total;
}

AccrualResult accrue_window(std::span<const double> holdings_at_last_trade,
                            std::span<const ReturnDecomposition> windows) {
    return {accrue_between_trades(holdings_at_last_trade, windows),
            accumulate_dividends(holdings_at_last_trade, windows)};
}

MarketDataset load_market_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_market_csv(text);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

MarketDataset parse_market_csv(std::string_view text) {
    struct Builder {
        StockSeries series;
        bool delisted{false};
    };
    std::vector<Date> dates;
    std::map<std::string, Builder, std::less<>> builders;
    bool header_seen = false;

    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto fail = [&](const std::string& msg) {
            throw DataError(fmt::format("line {}: {}", line_no, msg));
        };
        if (!header_seen) {
            if (line != "date,stock_id,market_cap,total_return,delisted") {
                fail("expected header 'date,stock_id,market_cap,total_return,delisted'");
            }
            header_seen = true;
            return;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5) fail(fmt::format("expected 5 fields, found {}", fields.size()));

        Date date;
        try {
            date = parse_date(trim(fields[0]));
        } catch (const DataError& e) {
            fail(e.what());
        }
        if (dates.empty() || dates.back() < date) {
            dates.push_back(date);
        } else if (date < dates.back()) {
            fail(fmt::format("date {} is earlier than {}", format_date(date),
                             format_date(dates.back())));
        }
        const std::size_t day = dates.size() - 1;

        const auto id = trim(fields[1]);
        if (id.empty()) fail("empty stock_id");

        const auto cap_text = trim(fields[2]);
        std::optional<double> cap;
        if (!cap_text.empty()) {
            cap = parse_double(cap_text);
            if (!cap) fail(fmt::format("bad market_cap '{}'", cap_text));
            if (*cap <= 0.0) fail(fmt::format("market_cap must be positive, got {}", *cap));
        }
        const auto ret = parse_double(trim(fields[3]));
        if (!ret) fail(fmt::format("bad total_return '{}'", trim(fields[3])));
        const auto flag = trim(fields[4]);
        if (flag != "0" && flag != "1") fail(fmt::format("delisted must be 0 or 1, got '{}'", flag));
        if (flag == "1" && cap) fail("delisting row must leave market_cap empty");

        auto it = builders.find(id);
        if (it == builders.end()) {
            if (!cap) fail(fmt::format("stock {} first appears without a capitalization", id));
            Builder b;
            b.series.id = std::string(id);
            b.series.first_day = day;
            it = builders.emplace(std::string(id), std::move(b)).first;
        } else {
            Builder& b = it->second;
            const std::size_t next = b.series.first_day + b.series.returns.size();
            if (next == day + 1) fail(fmt::format("duplicate row for stock {} on {}", id, format_date(date)));
            if (b.delisted) fail(fmt::format("stock {} has data after its delisting", id));
            if (next != day) {
                fail(fmt::format("stock {} has no row on {}", id, format_date(dates[next])));
            }
        }
        Builder& b = it->second;
        b.series.returns.push_back(*ret);
        if (cap) {
            b.series.caps.push_back(*cap);
        } else {
            b.series.delisting_day = day;
            b.delisted = true;
        }
    });

    if (!header_seen) throw DataError("empty market file");
    if (dates.empty()) throw DataError("market file has no rows");

    std::vector<StockSeries> stocks;
    stocks.reserve(builders.size());
    for (auto& [id, b] : builders) {
        const std::size_t end = b.series.first_day + b.series.returns.size();
        if (!b.delisted && end != dates.size()) {
            throw DataError(fmt::format("stock {} stops on {} without a delisting row", id,
                                        format_date(dates[end - 1])));
        }
        stocks.push_back(std::move(b.series));
    }
    return MarketDataset(std::move(dates), std::move(stocks));
}

std::string to_market_csv(const MarketDataset& data) {
    std::string out = "date,stock_id,market_cap,total_return,delisted\n";
    const auto stocks = data.stocks();
    // stocks are sorted by id, so each day's rows come out in id order.
    for (std::size_t day = 0; day < data.num_days(); ++day) {
        const std::string date = format_date(data.dates()[day]);
        for (const auto& s : stocks) {
            if (!s.has_return(day)) continue;
            if (s.has_cap(day)) {
                fmt::format_to(std::back_inserter(out), "{},{},{:.17g},{:.17g},0\n", date, s.id,
                               s.cap(day), s.total_return(day));
            } else {
                fmt::format_to(std::back_inserter(out), "{},{},,{:.17g},1\n", date, s.id,
                               s.total_return(day));
            }
        }
    }
    return out;
}

std::vector<RiskFreePoint> load_risk_free_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_risk_free_csv(text);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<RiskFreePoint> parse_risk_free_csv(std::string_view text) {
    std::vector<RiskFreePoint> out;
    bool header_seen = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto fail = [&](const std::string& msg) {
            throw DataError(fmt::format("line {}: {}", line_no, msg));
        };
        if (!header_seen) {
            if (line != "date,annual_yield") fail("expected header 'date,annual_yield'");
            header_seen = true;
            return;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) fail(fmt::format("expected 2 fields, found {}", fields.size()));
        RiskFreePoint p;
        try {
            p.date = parse_date(trim(fields[0]));
        } catch (const DataError& e) {
            fail(e.what());
        }
        const auto y = parse_double(trim(fields[1]));
        if (!y) fail(fmt::format("bad annual_yield '{}'", trim(fields[1])));
        p.annual_yield = *y;
        if (!out.empty() && !(out.back().date < p.date)) fail("dates not strictly increasing");
        out.push_back(p);
    });
    if (!header_seen) throw DataError("empty risk-free file");
    return out;
}

}  // namespace sptc
