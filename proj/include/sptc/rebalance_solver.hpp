#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sptc {

/// Proportional cost rates, as a fraction of the currency amount traded.
struct CostRates {
    double tc_buy{0.0};
    double tc_sell{0.0};

    static CostRates uniform(double tc) { return {tc, tc}; }
};

/// One rebalance: pre-trade holdings psi(t-), cash dividends D(t-) waiting to
/// be reinvested, and the target weights pi(t) the portfolio must hit after
/// paying costs.
///
/// Construct through make(); it validates the inputs and renormalizes targets
/// whose sum is within 1e-9 of one.
class RebalanceProblem {
public:
    static RebalanceProblem make(std::vector<double> holdings_prev, double dividends,
                                 std::vector<double> targets, CostRates rates);

    std::span<const double> holdings_prev() const { return holdings_; }
    std::span<const double> targets() const { return targets_; }
    double dividends() const { return dividends_; }
    CostRates rates() const { return rates_; }
    double wealth_prev() const { return wealth_prev_; }
    std::size_t size() const { return holdings_.size(); }

    /// pi_i(t-)/pi_i(t) for positive targets, 0 for zero targets.
    double weight_ratio(std::size_t i) const;

private:
    RebalanceProblem() = default;

    std::vector<double> holdings_;
    std::vector<double> targets_;
    double dividends_{0.0};
    CostRates rates_{};
    double wealth_prev_{0.0};
};

/// Breakpoint data of the piecewise-linear self-financing equation.
/// Indices are positions in the problem; pivot is 0-based.
struct SolverBreakpointState {
    std::vector<double> weight_ratios;
    double normalized_dividend{0.0};
    std::vector<double> gap_values;
    std::size_t pivot_index{0};
    double pi_buy{0.0};
    double pi_sell{0.0};
    double pi_bar_buy{0.0};
    double pi_bar_sell{0.0};
};

struct RebalanceOutcome {
    std::vector<double> holdings_new;
    double scale{1.0};
    double transaction_costs{0.0};
    double wealth_new{0.0};
};

/// [D(t-) + (1 - tc_sell) * sum of holdings with zero target] / V(t-).
double normalized_dividend(const RebalanceProblem& problem);

/// Full breakpoint table: every c_i and its gap value, the pivot j and the
/// aggregates the closed form is built from. O(d^2); meant for inspection and
/// tests, the solvers below do not use it.
SolverBreakpointState breakpoint_gaps(const RebalanceProblem& problem);

/// LHS - RHS of the normalized self-financing equation at scale c.
/// Nondecreasing in c; its root is the scale factor.
double self_financing_residual(const RebalanceProblem& problem, double c);

/// Closed-form scale factor. Ranks the ratios, starts at the largest ratio
/// not above one and walks toward the pivot.
double solve_scale_analytic(const RebalanceProblem& problem);

/// Bisection on the sign of self_financing_residual.
double solve_scale_numeric(const RebalanceProblem& problem);

/// Post-trade holdings c * V(t-) * pi(t) and the costs paid to reach them.
RebalanceOutcome rebalance(const RebalanceProblem& problem);

}  // namespace sptc
