#include "sptc/tc_smoothing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

void SmoothingConfig::validate() const {
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
        throw InvalidInput(fmt::format("alpha0={} not in (0,1)", alpha0));
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput(fmt::format("beta={} must be >= 0", beta));
    if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidInput(fmt::format("xi={} must be > 0", xi));
}

double quarterly_relative_tc(std::span<const double> baseline_tc,
                             std::span<const double> baseline_wealth_pre, double xi) {
    if (baseline_tc.empty()) throw InvalidInput("relative-cost window has no trading days");
    if (baseline_tc.size() != baseline_wealth_pre.size()) {
        throw InvalidInput("cost and wealth windows differ in length");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < baseline_tc.size(); ++k) {
        if (!(baseline_wealth_pre[k] > 0.0)) throw InvalidInput("baseline wealth must be positive");
        sum += std::min(baseline_tc[k] / baseline_wealth_pre[k], xi);
    }
    return sum / static_cast<double>(baseline_tc.size());
}

double alpha_from_tc_bar(double alpha0, double beta, double tc_bar) {
    return std::max(std::min(alpha0 * (1.0 - beta * tc_bar), 1.0), 0.0);
}

double update_alpha(SmoothingState& state, std::size_t u, const SmoothingConfig& config) {
    if (u < 1 || u > state.tc_tilde.size()) {
        throw InvalidInput(fmt::format("renewal index {} outside recorded quarters", u));
    }
    if (u < 4) return config.alpha0;
    double trailing = 0.0;
    for (std::size_t v = u - 3; v <= u; ++v) trailing += state.tc_tilde[v - 1];
    trailing /= 4.0;
    if (trailing == 0.0) {
        state.diagnostics.push_back(
            fmt::format("renewal {}: trailing relative cost is zero, alpha kept at alpha0", u));
        return config.alpha0;
    }
    const double tc_bar = state.tc_tilde[u - 1] / trailing - 1.0;
    return alpha_from_tc_bar(config.alpha0, config.beta, tc_bar);
}

AlphaController::AlphaController(SmoothingConfig config) : config_(config) {
    config_.validate();
    state_.alpha = config_.alpha0;
}

void AlphaController::record_trading_day(double baseline_tc, double baseline_wealth_pre) {
    window_tc_.push_back(baseline_tc);
    window_wealth_.push_back(baseline_wealth_pre);
}

double AlphaController::on_renewal(std::size_t day) {
    state_.renewal_days.push_back(day);
    state_.trading_days.push_back(window_tc_.size());
    state_.tc_tilde.push_back(quarterly_relative_tc(window_tc_, window_wealth_, config_.xi));
    window_tc_.clear();
    window_wealth_.clear();
    state_.alpha = update_alpha(state_, state_.tc_tilde.size(), config_);
    return state_.alpha;
}

double qv_relative_tc(std::span<const double> tc_path, std::span<const double> wealth_path) {
    if (tc_path.size() != wealth_path.size()) throw InvalidInput("cost and wealth paths misaligned");
    double qv = 0.0;
    double prev = 0.0;
    for (std::size_t l = 0; l < tc_path.size(); ++l) {
        if (!(wealth_path[l] > 0.0)) throw InvalidInput("wealth must be positive");
        const double rel = tc_path[l] / wealth_path[l];
        if (l > 0) qv += (rel - prev) * (rel - prev);
        prev = rel;
    }
    return qv;
}

}  // namespace sptc
