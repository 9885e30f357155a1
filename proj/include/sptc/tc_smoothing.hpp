#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sptc {

struct SmoothingConfig {
    double alpha0{0.6};
    double beta{0.05};
    double xi{1e-5};

    void validate() const;
};

/// Quarter-by-quarter record for the dynamic convexity weight. Entry u-1 of
/// tc_tilde and trading_days belongs to the window [t_{u-1}^r, t_u^r).
struct SmoothingState {
    std::vector<std::size_t> renewal_days;
    std::vector<double> tc_tilde;
    std::vector<std::size_t> trading_days;
    double alpha{0.6};
    std::vector<std::string> diagnostics;
};

/// Mean over the window of min(TC(t)/V(t-), xi). The two spans hold the
/// baseline's costs and pre-trade wealth on each trading day of the window.
double quarterly_relative_tc(std::span<const double> baseline_tc,
                             std::span<const double> baseline_wealth_pre, double xi);

/// clamp(alpha0 * (1 - beta * tc_bar), 0, 1).
double alpha_from_tc_bar(double alpha0, double beta, double tc_bar);

/// Convexity weight at renewal u (1-based, u <= tc_tilde.size()). Returns
/// alpha0 before the fourth renewal, and also when the trailing four-quarter
/// average is zero; the latter appends a diagnostic to the state.
double update_alpha(SmoothingState& state, std::size_t u, const SmoothingConfig& config);

/// Drives SmoothingState from the backtest loop: feed every baseline trading
/// day, then close the quarter on each renewal day before trading.
class AlphaController {
public:
    explicit AlphaController(SmoothingConfig config);

    void record_trading_day(double baseline_tc, double baseline_wealth_pre);
    /// Closes the current window at renewal day `day` and returns the new alpha.
    double on_renewal(std::size_t day);

    double alpha() const { return state_.alpha; }
    const SmoothingState& state() const { return state_; }

private:
    SmoothingConfig config_;
    SmoothingState state_;
    std::vector<double> window_tc_;
    std::vector<double> window_wealth_;
};

/// sum_l (TC(t_l)/V(t_l-) - TC(t_{l-1})/V(t_{l-1}-))^2 with the first entry
/// taken as t_0. Costs and wealth are aligned per trading day.
double qv_relative_tc(std::span<const double> tc_path, std::span<const double> wealth_path);

}  // namespace sptc
