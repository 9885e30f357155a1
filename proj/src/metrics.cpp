#include "sptc/metrics.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

namespace {

int year_of(Date d) { return static_cast<int>(d.year()); }

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<YearlyReturn> yearly_returns(std::span<const Date> dates, std::span<const double> wealth) {
    if (dates.empty() || dates.size() != wealth.size()) {
        throw InvalidInput("wealth path must be nonempty and aligned with dates");
    }
    // (year, index of its last date); anchor for the first year is t_0.
    std::vector<std::pair<int, std::size_t>> year_ends;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (i + 1 == dates.size() || year_of(dates[i]) != year_of(dates[i + 1])) {
            year_ends.emplace_back(year_of(dates[i]), i);
        }
    }
    const Date first = dates.front();
    const Date last = dates.back();
    const bool first_complete =
        static_cast<unsigned>(first.month()) == 1 && static_cast<unsigned>(first.day()) <= 7;
    const bool last_complete =
        static_cast<unsigned>(last.month()) == 12 && static_cast<unsigned>(last.day()) >= 24;

    std::vector<YearlyReturn> out;
    for (std::size_t k = 0; k < year_ends.size(); ++k) {
        if (k == 0 && !first_complete) continue;
        if (k + 1 == year_ends.size() && !last_complete) continue;
        const double start = k == 0 ? wealth.front() : wealth[year_ends[k - 1].second];
        out.push_back({year_ends[k].first, wealth[year_ends[k].second] / start - 1.0});
    }
    return out;
}

double risk_free_for_year(std::span<const RiskFreePoint> series, int year, Date start) {
    if (series.empty()) return 0.0;
    const RiskFreePoint* pick = nullptr;
    for (const auto& p : series) {
        if (!(start < p.date)) pick = &p;
        else break;
    }
    if (pick) return pick->annual_yield;
    for (const auto& p : series) {
        if (year_of(p.date) == year) return p.annual_yield;
    }
    throw DataError(fmt::format("risk-free series has no yield for {}", year));
}

Metrics summarize(const BacktestResult& result, std::span<const RiskFreePoint> risk_free,
                  const BacktestResult* benchmark) {
    if (result.wealth.empty()) throw InvalidInput("cannot summarize an empty wealth path");
    Metrics m;
    m.terminal_wealth = result.wealth.back();
    m.terminal_tc = result.cumulative_tc.back();
    m.qv = result.qv;
    m.yearly = yearly_returns(result.dates, result.wealth);
    if (m.yearly.empty()) return m;

    std::vector<double> r;
    std::vector<double> excess_rf;
    std::map<int, std::size_t> year_end;
    for (std::size_t i = 0; i < result.dates.size(); ++i) year_end[year_of(result.dates[i])] = i;
    for (const auto& y : m.yearly) {
        r.push_back(y.value);
        auto prev = year_end.find(y.year - 1);
        const Date start = prev != year_end.end() ? result.dates[prev->second] : result.dates.front();
        excess_rf.push_back(y.value - risk_free_for_year(risk_free, y.year, start));
    }
    m.yearly_return = mean(r);

    if (r.size() >= 2) {
        double ss = 0.0;
        for (double x : r) ss += (x - *m.yearly_return) * (x - *m.yearly_return);
        m.std_dev = std::sqrt(ss / static_cast<double>(r.size() - 1));
        if (*m.std_dev > 0.0) m.sharpe = mean(excess_rf) / *m.std_dev;
    }

    if (benchmark) {
        const auto bench = yearly_returns(benchmark->dates, benchmark->wealth);
        std::map<int, double> by_year;
        for (const auto& y : bench) by_year[y.year] = y.value;
        std::vector<double> diff;
        for (const auto& y : m.yearly) {
            auto it = by_year.find(y.year);
            if (it != by_year.end()) diff.push_back(y.value - it->second);
        }
        if (!diff.empty()) m.excess_return = mean(diff);
    }
    return m;
}

}  // namespace sptc
