#include "sptc/rebalance_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

namespace {

constexpr double kWeightSumTolerance = 1e-9;
constexpr double kBracketTolerance = 1e-13;
constexpr int kMaxDoublings = 64;

void validate_rates(CostRates rates) {
    auto ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r < 1.0; };
    if (!ok(rates.tc_buy) || !ok(rates.tc_sell)) {
        throw InvalidInput(fmt::format("cost rates must lie in [0,1): buy={}, sell={}",
                                       rates.tc_buy, rates.tc_sell));
    }
}

}  // namespace

RebalanceProblem RebalanceProblem::make(std::vector<double> holdings_prev, double dividends,
                                        std::vector<double> targets, CostRates rates) {
    if (holdings_prev.empty()) throw InvalidInput("rebalance problem has no positions");
    if (holdings_prev.size() != targets.size()) {
        throw InvalidInput(fmt::format("holdings ({}) and targets ({}) differ in length",
                                       holdings_prev.size(), targets.size()));
    }
    validate_rates(rates);
    if (!std::isfinite(dividends) || dividends < 0.0) {
        throw InvalidInput(fmt::format("dividends must be nonnegative, got {}", dividends));
    }

    double wealth = 0.0;
    for (std::size_t i = 0; i < holdings_prev.size(); ++i) {
        if (!std::isfinite(holdings_prev[i]) || holdings_prev[i] < 0.0) {
            throw InvalidInput(fmt::format("holding {} is negative or not finite: {}", i,
                                           holdings_prev[i]));
        }
        wealth += holdings_prev[i];
    }
    if (!(wealth > 0.0)) throw InvalidInput("pre-trade wealth must be positive");

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!std::isfinite(targets[i]) || targets[i] < 0.0) {
            throw InvalidInput(
                fmt::format("target {} is negative or not finite: {}", i, targets[i]));
        }
        weight_sum += targets[i];
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        throw InvalidInput(fmt::format("target weights sum to {}, expected 1", weight_sum));
    }
    if (weight_sum != 1.0) {
        for (auto& t : targets) t /= weight_sum;
    }

    RebalanceProblem p;
    p.holdings_ = std::move(holdings_prev);
    p.targets_ = std::move(targets);
    p.dividends_ = dividends;
    p.rates_ = rates;
    p.wealth_prev_ = wealth;
    return p;
}

double RebalanceProblem::weight_ratio(std::size_t i) const {
    if (targets_[i] <= 0.0) return 0.0;
    return (holdings_[i] / wealth_prev_) / targets_[i];
}

double normalized_dividend(const RebalanceProblem& problem) {
    const auto holdings = problem.holdings_prev();
    const auto targets = problem.targets();
    double liquidated = 0.0;
    for (std::size_t i = 0; i < holdings.size(); ++i) {
        if (targets[i] == 0.0) liquidated += holdings[i];
    }
    const double sell_net = 1.0 - problem.rates().tc_sell;
    return (problem.dividends() + sell_net * liquidated) / problem.wealth_prev();
}

double self_financing_residual(const RebalanceProblem& problem, double c) {
    const auto targets = problem.targets();
    const double buy = 1.0 + problem.rates().tc_buy;
    const double sell = 1.0 - problem.rates().tc_sell;
    double up = 0.0;
    double down = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] <= 0.0) continue;
        const double ci = problem.weight_ratio(i);
        if (c > ci) {
            up += (c - ci) * targets[i];
        } else {
            down += (ci - c) * targets[i];
        }
    }
    return buy * up - sell * down - normalized_dividend(problem);
}

SolverBreakpointState breakpoint_gaps(const RebalanceProblem& problem) {
    const std::size_t d = problem.size();
    const auto targets = problem.targets();
    const double buy = 1.0 + problem.rates().tc_buy;
    const double sell = 1.0 - problem.rates().tc_sell;

    SolverBreakpointState s;
    s.normalized_dividend = normalized_dividend(problem);
    s.weight_ratios.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.weight_ratios[i] = problem.weight_ratio(i);

    s.gap_values.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double cj = s.weight_ratios[j];
        double up = 0.0;
        double down = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = s.weight_ratios[i];
            up += std::max(cj - ci, 0.0) * targets[i];
            down += std::max(ci - cj, 0.0) * targets[i];
        }
        s.gap_values[j] = buy * up - sell * down;
    }

    // argmax over gaps not above D-hat; strict comparison keeps the first index on ties.
    bool found = false;
    for (std::size_t i = 0; i < d; ++i) {
        if (s.gap_values[i] > s.normalized_dividend) continue;
        if (!found || s.gap_values[i] > s.gap_values[s.pivot_index]) {
            s.pivot_index = i;
            found = true;
        }
    }

    const double cj = s.weight_ratios[s.pivot_index];
    const auto holdings = problem.holdings_prev();
    for (std::size_t i = 0; i < d; ++i) {
        const double ci = s.weight_ratios[i];
        if (ci <= cj) {
            s.pi_buy += targets[i];
            s.pi_bar_buy += ci * targets[i];
        } else {
            s.pi_sell += targets[i];
            s.pi_bar_sell += holdings[i] / problem.wealth_prev();
        }
    }
    s.pi_buy *= buy;
    s.pi_bar_buy *= buy;
    s.pi_sell *= sell;
    s.pi_bar_sell *= sell;
    return s;
}

double solve_scale_analytic(const RebalanceProblem& problem) {
    const auto targets = problem.targets();
    const auto holdings = problem.holdings_prev();
    const double buy = 1.0 + problem.rates().tc_buy;
    const double sell = 1.0 - problem.rates().tc_sell;
    const double d_hat = normalized_dividend(problem);

    struct Entry {
        double ratio;
        double target;
        double prev_weight;
    };
    std::vector<Entry> entries;
    entries.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] <= 0.0) continue;
        entries.push_back({problem.weight_ratio(i), targets[i], holdings[i] / problem.wealth_prev()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.ratio < b.ratio; });

    // Tied ratios form one breakpoint; group_end[k] is one past the last entry tied with k.
    const std::size_t n = entries.size();
    std::vector<double> cum_target(n + 1, 0.0);
    std::vector<double> cum_prev(n + 1, 0.0);
    std::vector<double> cum_ratio_target(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        cum_target[k + 1] = cum_target[k] + entries[k].target;
        cum_prev[k + 1] = cum_prev[k] + entries[k].prev_weight;
        cum_ratio_target[k + 1] = cum_ratio_target[k] + entries[k].ratio * entries[k].target;
    }
    auto group_end = [&](std::size_t k) {
        std::size_t e = k + 1;
        while (e < n && entries[e].ratio == entries[k].ratio) ++e;
        return e;
    };
    auto group_begin = [&](std::size_t k) {
        while (k > 0 && entries[k - 1].ratio == entries[k].ratio) --k;
        return k;
    };
    auto gap_at = [&](std::size_t k) {
        const std::size_t e = group_end(k);
        const double c = entries[k].ratio;
        const double le_target = cum_target[e];
        const double le_ratio_target = cum_ratio_target[e];
        const double gt_target = cum_target[n] - le_target;
        const double gt_ratio_target = cum_ratio_target[n] - le_ratio_target;
        return buy * (c * le_target - le_ratio_target) - sell * (gt_ratio_target - c * gt_target);
    };

    // Start at the largest ratio not above one.
    std::size_t k = 0;
    for (std::size_t m = 0; m < n; ++m) {
        if (entries[m].ratio <= 1.0) k = m;
        else break;
    }
    k = group_begin(k);

    if (gap_at(k) > d_hat) {
        while (k > 0) {
            k = group_begin(k - 1);
            if (gap_at(k) <= d_hat) break;
        }
    } else {
        for (;;) {
            const std::size_t next = group_end(k);
            if (next >= n || gap_at(next) > d_hat) break;
            k = next;
        }
    }

    const std::size_t e = group_end(k);
    const double pi_buy = buy * cum_target[e];
    const double pi_sell = sell * (cum_target[n] - cum_target[e]);
    const double pi_bar_buy = buy * cum_ratio_target[e];
    const double pi_bar_sell = sell * (cum_prev[n] - cum_prev[e]);
    return (pi_bar_buy + pi_bar_sell + d_hat) / (pi_buy + pi_sell);
}

double solve_scale_numeric(const RebalanceProblem& problem) {
    double lo = problem.weight_ratio(0);
    double hi = lo;
    for (std::size_t i = 1; i < problem.size(); ++i) {
        const double ci = problem.weight_ratio(i);
        lo = std::min(lo, ci);
        hi = std::max(hi, ci);
    }
    hi = std::max(hi, 1.0);

    int doublings = 0;
    while (self_financing_residual(problem, hi) < 0.0) {
        if (++doublings > kMaxDoublings) {
            throw std::runtime_error("bisection found no sign change for the scale factor");
        }
        lo = hi;
        hi *= 2.0;
    }

    while (hi - lo > kBracketTolerance * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (self_financing_residual(problem, mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RebalanceOutcome rebalance(const RebalanceProblem& problem) {
    const double c = solve_scale_analytic(problem);
    const auto holdings = problem.holdings_prev();
    const auto targets = problem.targets();
    const CostRates rates = problem.rates();

    RebalanceOutcome out;
    out.scale = c;
    out.wealth_new = c * problem.wealth_prev();
    out.holdings_new.resize(holdings.size());
    double bought = 0.0;
    double sold = 0.0;
    for (std::size_t i = 0; i < holdings.size(); ++i) {
        const double next = targets[i] > 0.0 ? out.wealth_new * targets[i] : 0.0;
        out.holdings_new[i] = next;
        if (next > holdings[i]) {
            bought += next - holdings[i];
        } else {
            sold += holdings[i] - next;
        }
    }
    out.transaction_costs = rates.tc_buy * bought + rates.tc_sell * sold;
    return out;
}

}  // namespace sptc
