// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sptc/backtest.hpp"
#include "sptc/manifest.hpp"
#include "sptc/metrics.hpp"
#include "sptc/portfolios.hpp"
#include "sptc/rebalance_solver.hpp"
#include "sptc/reports.hpp"
#include "sptc/synthetic_market.hpp"
#include "sptc/tc_smoothing.hpp"
#include "test_support.hpp"

using namespace sptc;
using sptc::testing::TestRng;

namespace {

constexpr double kSolverRelTol = 1e-9;
constexpr double kSolverSeconds = 10.0;
constexpr double kAccountingTol = 1e-9;
constexpr double kFrictionlessRelTol = 1e-10;
constexpr double kHandTraceRelTol = 1e-9;
constexpr double kGeneratorTol = 1e-12;
constexpr double kExactTol = 1e-15;
constexpr double kLongRunSeconds = 60.0;

struct Verdict {
    bool pass{true};
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------
// Reference pieces written without the library.

struct RefStock {
    const StockSeries* s;
    bool has_cap(std::size_t t) const { return t >= s->first_day && t < s->first_day + s->caps.size(); }
    double cap(std::size_t t) const { return s->caps[t - s->first_day]; }
    bool has_return(std::size_t t) const { return t >= s->first_day && t < s->first_day + s->returns.size(); }
    double ret(std::size_t t) const { return s->returns[t - s->first_day]; }
};

std::vector<std::size_t> ref_top(const MarketDataset& data, std::size_t t, std::size_t d) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.num_stocks(); ++i) {
        if (RefStock{&data.stock(i)}.has_cap(t)) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double ca = data.stock(a).caps[t - data.stock(a).first_day];
        const double cb = data.stock(b).caps[t - data.stock(b).first_day];
        if (ca != cb) return ca > cb;
        return data.stock(a).id < data.stock(b).id;
    });
    idx.resize(d);
    return idx;
}

std::vector<double> ref_weights(PortfolioKind kind, const std::vector<double>& caps, double p) {
    double total = 0.0;
    for (double c : caps) total += c;
    std::vector<double> mu(caps.size());
    for (std::size_t i = 0; i < caps.size(); ++i) mu[i] = caps[i] / total;
    std::vector<double> w(caps.size());
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        switch (kind) {
            case PortfolioKind::index_tracking: w[i] = mu[i]; break;
            case PortfolioKind::equal: w[i] = 1.0; break;
            case PortfolioKind::entropy: w[i] = mu[i] > 0 ? -mu[i] * std::log(mu[i]) : 0.0; break;
            default: w[i] = std::pow(mu[i], p); break;
        }
        s += w[i];
    }
    for (double& x : w) x /= s;
    return w;
}

bool month_end(std::span<const Date> dates, std::size_t t) {
    return t + 1 == dates.size() || dates[t].month() != dates[t + 1].month();
}

// Wealth path with direct compounding of total returns: daily trading,
// no costs, dividends reinvested immediately, monthly list renewal.
std::vector<double> ref_frictionless(const MarketDataset& data, PortfolioKind kind, std::size_t d, double p,
                                     double v0) {
    std::vector<double> out(data.num_days());
    std::vector<std::size_t> list = ref_top(data, 0, d);
    auto weights_on = [&](std::size_t t) {
        std::vector<double> caps;
        for (std::size_t i : list) caps.push_back(RefStock{&data.stock(i)}.cap(t));
        return ref_weights(kind, caps, p);
    };
    std::vector<std::size_t> held = list;
    std::vector<double> w = weights_on(0);
    double V = v0;
    out[0] = V;
    for (std::size_t t = 1; t < data.num_days(); ++t) {
        double growth = 0.0;
        for (std::size_t k = 0; k < held.size(); ++k) {
            const RefStock s{&data.stock(held[k])};
            growth += w[k] * (1.0 + (s.has_return(t) ? s.ret(t) : 0.0));
        }
        V *= growth;
        out[t] = V;
        if (month_end(data.dates(), t)) {
            list = ref_top(data, t, d);
        } else {
            std::erase_if(list, [&](std::size_t i) { return !RefStock{&data.stock(i)}.has_cap(t); });
        }
        held = list;
        w = weights_on(t);
    }
    return out;
}

// Currency equation for one rebalance, solved by plain bisection.
double ref_scale(const std::vector<double>& psi, double D, const std::vector<double>& pi, double tcb, double tcs) {
    double V = 0.0;
    for (double x : psi) V += x;
    auto f = [&](double c) {
        double buy = 0.0, sell = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double x = c * V * pi[i] - psi[i];
            (x > 0 ? buy : sell) += std::abs(x);
        }
        return (1 + tcb) * buy - (1 - tcs) * sell - D;
    };
    double lo = 0.0, hi = 4.0;
    while (f(hi) < 0) hi *= 2;
    for (int k = 0; k < 300 && hi - lo > 0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

Verdict solver_equivalence() {
    TestRng rng(20240101);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t bad = 0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t d = 2 + rng.index(499);
        std::vector<double> psi(d), pi(d);
        double V = 0.0;
        for (auto& x : psi) V += (x = rng.uniform(0.0, 100.0));
        const double zero_share = rng.uniform(0.0, 0.5);
        double s = 0.0;
        for (auto& x : pi) x = rng.uniform() < zero_share ? 0.0 : rng.uniform(0.0, 1.0);
        pi[rng.index(d)] = rng.uniform(0.5, 1.0);
        for (double x : pi) s += x;
        for (auto& x : pi) x /= s;
        const double D = rng.uniform(0.0, 0.1) * V;
        const CostRates rates{rng.uniform(0.0, 0.05), rng.uniform(0.0, 0.05)};
        const auto prob = RebalanceProblem::make(psi, D, pi, rates);
        const double a = solve_scale_analytic(prob);
        const double n = solve_scale_numeric(prob);
        const double r = rel_diff(a, n);
        worst = std::max(worst, r);
        if (!(r <= kSolverRelTol)) ++bad;
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < kSolverSeconds,
            fmt::format("10000 problems, max rel diff {:.3g} (tol {:g}), {} over tol, {:.2f}s (limit {:g}s)",
                        worst, kSolverRelTol, bad, secs, kSolverSeconds)};
}

Verdict self_financing() {
    const MarketDataset data = generate_market(SyntheticParams{});  // 100 stocks x 2500 days
    Verdict v;
    std::string parts;
    for (auto kind : {PortfolioKind::index_tracking, PortfolioKind::equal, PortfolioKind::entropy,
                      PortfolioKind::diversity}) {
        BacktestConfig cfg;
        cfg.kind = kind;
        cfg.d = 50;
        cfg.trading = TradingFrequency::daily;
        cfg.renewing = RenewingFrequency::monthly;
        cfg.rates = {0.01, 0.005};
        cfg.diversity = {0.8, 0.6, 250};
        double worst_res = 0.0, worst_id = 0.0;
        std::size_t n = 0;
        try {
            const auto r = run_backtest(cfg, data);
            for (const auto& t : r.trades) {
                if (!t.traded || t.day == 0) continue;
                ++n;
                worst_res = std::max(worst_res, std::abs(t.self_financing_residual) / t.wealth_pre);
                const double expected = t.wealth_pre + t.dividends - t.transaction_costs;
                worst_id = std::max(worst_id, rel_diff(t.wealth_post, expected));
                if (r.wealth[t.day] != t.wealth_post) worst_id = INFINITY;
            }
        } catch (const std::exception& e) {
            v.pass = false;
            parts += fmt::format(" {}: error {};", to_string(kind), e.what());
            continue;
        }
        if (!(worst_res <= kAccountingTol) || !(worst_id <= kAccountingTol) || n == 0) v.pass = false;
        parts += fmt::format(" {}: {} rebalances, residual/V- {:.2g}, identity {:.2g};", to_string(kind), n,
                             worst_res, worst_id);
    }
    v.detail = fmt::format("100x2500, tol {:g}:{}", kAccountingTol, parts);
    return v;
}

Verdict frictionless_oracle() {
    SyntheticParams p;
    p.seed = 77;
    p.n_stocks = 60;
    p.n_days = 1200;
    p.delist_hazard = 5e-4;
    p.dividend_prob = 0.03;
    const MarketDataset data = generate_market(p);
    std::size_t delistings = 0;
    for (const auto& s : data.stocks()) delistings += s.delisting_day ? 1 : 0;
    Verdict v;
    std::string parts;
    for (auto kind : {PortfolioKind::index_tracking, PortfolioKind::equal, PortfolioKind::entropy,
                      PortfolioKind::diversity}) {
        BacktestConfig cfg;
        cfg.kind = kind;
        cfg.d = 30;
        cfg.trading = TradingFrequency::daily;
        cfg.renewing = RenewingFrequency::monthly;
        cfg.rates = CostRates::uniform(0.0);
        cfg.diversity = {0.8, 1.0, 250};
        const auto r = run_backtest(cfg, data);
        const auto ref = ref_frictionless(data, kind, cfg.d, cfg.diversity.p, cfg.initial_wealth);
        double worst = 0.0;
        for (std::size_t t = 0; t < ref.size(); ++t) worst = std::max(worst, rel_diff(r.wealth[t], ref[t]));
        if (!(worst <= kFrictionlessRelTol)) v.pass = false;
        parts += fmt::format(" {} {:.2g};", to_string(kind), worst);
    }
    v.detail = fmt::format("60 stocks x 1200 days, {} delistings, max rel diff (tol {:g}):{}", delistings,
                           kFrictionlessRelTol, parts);
    return v;
}

Verdict hand_trace() {
    SyntheticParams p;
    p.seed = 1;
    p.n_stocks = 3;
    p.n_days = 10;
    p.dividend_prob = 0.3;  // so the trace exercises dividends too
    const MarketDataset data = generate_market(p);
    if (data.num_stocks() != 3) return {false, "fixture unexpectedly has delistings"};
    const double tc = 0.01;

    BacktestConfig cfg;
    cfg.kind = PortfolioKind::equal;
    cfg.d = 3;
    cfg.trading = TradingFrequency::daily;
    cfg.renewing = RenewingFrequency::quarterly;
    cfg.rates = CostRates::uniform(tc);
    const auto r = run_backtest(cfg, data);

    std::vector<double> psi(3, 1000.0 / 3.0);
    const std::vector<double> pi(3, 1.0 / 3.0);
    double cum_tc = 0.0, worst = 0.0, worst_tc = 0.0, dividends_seen = 0.0;
    for (std::size_t t = 1; t < 10; ++t) {
        double D = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& s = data.stock(i);
            const double ratio = s.caps[t] / s.caps[t - 1];
            const double total = s.returns[t];
            const double rd = std::max(1.0 + total - ratio, 0.0);
            D += psi[i] * rd;
            psi[i] *= 1.0 + (total - rd);
        }
        dividends_seen += D;
        double V = psi[0] + psi[1] + psi[2];
        const double c = ref_scale(psi, D, pi, tc, tc);
        const double after = c * V;
        cum_tc += V + D - after;
        for (std::size_t i = 0; i < 3; ++i) psi[i] = after * pi[i];
        worst = std::max(worst, rel_diff(r.wealth[t], after));
        worst_tc = std::max(worst_tc, std::abs(r.cumulative_tc[t] - cum_tc) / after);
    }
    return {worst <= kHandTraceRelTol && worst_tc <= kHandTraceRelTol,
            fmt::format("3x10 equal daily tc=1%: wealth rel diff {:.2g}, cumulative TC diff/V {:.2g} (tol {:g}); "
                        "dividends in trace {:.4g}",
                        worst, worst_tc, kHandTraceRelTol, dividends_seen)};
}

Verdict cost_monotonicity() {
    SyntheticParams p;
    p.seed = 9;
    p.n_stocks = 80;
    p.n_days = 1500;
    p.delist_hazard = 1e-4;
    const MarketDataset data = generate_market(p);
    Verdict v;
    std::string parts;
    for (auto kind : {PortfolioKind::index_tracking, PortfolioKind::equal, PortfolioKind::entropy,
                      PortfolioKind::diversity, PortfolioKind::diversity_dynamic}) {
        std::vector<double> terminal;
        bool traded = false;
        for (double tc : {0.0, 0.005, 0.01}) {
            BacktestConfig cfg;
            cfg.kind = kind;
            cfg.d = 40;
            cfg.trading = TradingFrequency::weekly;
            cfg.renewing = RenewingFrequency::monthly;
            cfg.rates = CostRates::uniform(tc);
            cfg.diversity = {0.8, 0.6, 52};
            const auto r = run_backtest(cfg, data);
            terminal.push_back(r.wealth.back());
            if (tc > 0 && r.cumulative_tc.back() > 0) traded = true;
        }
        const bool ok = traded ? (terminal[0] > terminal[1] && terminal[1] > terminal[2])
                               : (terminal[0] >= terminal[1] && terminal[1] >= terminal[2]);
        if (!ok) v.pass = false;
        parts += fmt::format(" {} {:.6g}>{:.6g}>{:.6g};", to_string(kind), terminal[0], terminal[1], terminal[2]);
    }
    v.detail = "terminal wealth at tc 0/0.5%/1%:" + parts;
    return v;
}

Verdict generator_identities() {
    TestRng rng(4242);
    double worst_sum = 0.0, worst_closed = 0.0;
    bool alpha0_exact = true;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t d = 2 + rng.index(499);
        std::vector<double> caps(d), lam(d);
        double sl = 0.0;
        for (auto& c : caps) c = std::exp(rng.uniform(0.0, 12.0));
        for (auto& x : lam) sl += (x = rng.uniform());
        for (auto& x : lam) x /= sl;
        const auto mu = market_weights(caps);
        const double pdeg = rng.uniform(0.05, 0.95);
        const double alpha = rng.uniform();
        const auto blended = smooth_weights(mu, WeightVector::from(lam), alpha).blended;
        const std::vector<WeightVector> all{target_index_tracking(mu), target_equal(d), target_entropy(mu),
                                            target_diversity(mu, blended, {pdeg, alpha, 1}),
                                            target_diversity(mu, mu.values(), {pdeg, 1.0, 1})};
        for (const auto& w : all) {
            double s = 0.0;
            for (double x : w.values()) s += x;
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        }
        double z = 0.0;
        for (std::size_t i = 0; i < d; ++i) z += std::pow(mu[i], pdeg);
        for (std::size_t i = 0; i < d; ++i) {
            worst_closed = std::max(worst_closed, std::abs(all[4][i] - std::pow(mu[i], pdeg) / z));
        }
        const auto a0 = target_diversity(mu, smooth_weights(mu, WeightVector::from(lam), 0.0).blended, {pdeg, 0.0, 1});
        for (std::size_t i = 0; i < d; ++i) alpha0_exact = alpha0_exact && a0[i] == mu[i];
    }
    double worst_uniform = 0.0;
    for (std::size_t d : {2u, 3u, 7u, 100u, 500u}) {
        const auto e = target_entropy(WeightVector::from(std::vector<double>(d, 1.0 / static_cast<double>(d))));
        for (double x : e.values()) worst_uniform = std::max(worst_uniform, std::abs(x - 1.0 / static_cast<double>(d)));
    }
    const bool pass = worst_sum <= kGeneratorTol && worst_closed <= kGeneratorTol && alpha0_exact &&
                      worst_uniform <= kExactTol;
    return {pass, fmt::format("1000 random mu: |sum-1| {:.2g}, alpha=1 vs mu^p/sum {:.2g} (tol {:g}); alpha=0 "
                              "exact: {}; uniform entropy diff {:.2g}",
                              worst_sum, worst_closed, kGeneratorTol, alpha0_exact ? "yes" : "no", worst_uniform)};
}

std::string path_text(const BacktestResult& r) {
    std::string s;
    for (std::size_t t = 0; t < r.dates.size(); ++t) {
        s += format_number(r.wealth[t]) + "," + format_number(r.cumulative_tc[t]) + "\n";
    }
    return s;
}

Verdict dynamic_alpha(const MarketDataset& data) {
    // Adversarial cost streams straight into the controller.
    TestRng rng(99);
    double lo = 1.0, hi = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        AlphaController ctl({rng.uniform(0.01, 0.99), std::pow(10.0, rng.uniform(-3.0, 3.0)),
                             std::pow(10.0, rng.uniform(-8.0, -1.0))});
        for (int q = 0; q < 16; ++q) {
            for (int k = 0, n = 1 + static_cast<int>(rng.index(70)); k < n; ++k) {
                const double tc = rng.uniform() < 0.3 ? 0.0 : std::pow(10.0, rng.uniform(-15.0, 4.0));
                ctl.record_trading_day(tc, rng.uniform(1e-3, 1e6));
            }
            const double a = ctl.on_renewal(static_cast<std::size_t>(q));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    }
    // Engine runs with steep sensitivity.
    for (double beta : {5.0, 50.0}) {
        BacktestConfig cfg;
        cfg.kind = PortfolioKind::diversity_dynamic;
        cfg.d = 50;
        cfg.rates = CostRates::uniform(0.01);
        cfg.smoothing = {0.6, beta, 1e-5};
        const auto r = run_backtest(cfg, data);
        for (double a : r.alpha) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    }

    BacktestConfig dyn;
    dyn.kind = PortfolioKind::diversity_dynamic;
    dyn.d = 50;
    dyn.rates = CostRates::uniform(0.005);
    dyn.smoothing = {0.6, 0.0, 1e-5};
    BacktestConfig fixed = dyn;
    fixed.kind = PortfolioKind::diversity;
    fixed.diversity.alpha = 0.6;
    const auto a = run_backtest(dyn, data);
    const auto b = run_backtest(fixed, data);
    const bool identical = path_text(a) == path_text(b) && a.qv && b.qv &&
                           format_number(*a.qv) == format_number(*b.qv);

    const double hand = alpha_from_tc_bar(0.6, 0.05, 0.2);
    const bool hand_ok = std::abs(hand - 0.594) <= kExactTol;
    return {lo >= 0.0 && hi <= 1.0 && identical && hand_ok,
            fmt::format("alpha range [{:.3g}, {:.3g}]; beta=0 path byte-identical to constant alpha0: {}; "
                        "hand example {:.17g} (|diff| {:.2g}, tol {:g})",
                        lo, hi, identical ? "yes" : "no", hand, std::abs(hand - 0.594), kExactTol)};
}

Verdict qv_metric(const MarketDataset& data) {
    const std::vector<double> ones(3, 1.0);
    const double q1 = qv_relative_tc(std::vector<double>{0.0, 1e-5, 1e-5}, ones);
    const double q2 = qv_relative_tc(std::vector<double>{0.0, 0.0, 0.0}, ones);
    const double q3 = qv_relative_tc(std::vector<double>{0.0, 3e-6, 3e-6, 3e-6}, std::vector<double>(4, 1.0));
    const double tilde = quarterly_relative_tc(std::vector<double>{2e-6, 5e-5}, std::vector<double>{1.0, 1.0}, 1e-5);
    const bool hand = std::abs(q1 - 1e-10) <= kExactTol && q2 == 0.0 && std::abs(q3 - 9e-12) <= kExactTol &&
                      std::abs(tilde - 6e-6) <= kExactTol;

    BacktestConfig dyn;
    dyn.kind = PortfolioKind::diversity_dynamic;
    dyn.d = 50;
    dyn.rates = CostRates::uniform(0.01);
    dyn.smoothing = {0.6, 0.0, 1e-5};
    BacktestConfig base = dyn;
    base.kind = PortfolioKind::diversity;
    base.diversity.alpha = 0.6;
    const auto a = run_backtest(dyn, data);
    const auto b = run_backtest(base, data);
    std::vector<double> tc, v;
    for (const auto& t : a.baseline_trades) {
        tc.push_back(t.transaction_costs);
        v.push_back(t.wealth_pre);
    }
    const double shadow = qv_relative_tc(tc, v);
    const bool equal = a.qv && b.qv && *a.qv == *b.qv && *a.qv == shadow && *a.qv > 0.0;
    return {hand && equal,
            fmt::format("hand examples {:.3g}/{:.3g}/{:.3g}, TC-tilde {:.3g}; QV beta=0 {:.17g}, constant-alpha0 run "
                        "{:.17g}, shadow baseline {:.17g}",
                        q1, q2, q3, tilde, a.qv.value_or(NAN), b.qv.value_or(NAN), shadow)};
}

Verdict long_run() {
    SyntheticParams p;
    p.seed = 2016;
    p.n_stocks = 500;
    p.n_days = 13860;
    auto t0 = std::chrono::steady_clock::now();
    const MarketDataset data = generate_market(p);
    const MarketDataset again = generate_market(p);
    const double gen_secs = seconds_since(t0);
    const bool same_data = to_market_csv(data) == to_market_csv(again);

    BacktestConfig cfg;
    cfg.kind = PortfolioKind::diversity_dynamic;
    cfg.d = 500;
    cfg.trading = TradingFrequency::daily;
    cfg.renewing = RenewingFrequency::quarterly;
    cfg.rates = CostRates::uniform(0.005);
    std::vector<std::string> texts;
    double worst = 0.0;
    for (int run = 0; run < 2; ++run) {
        t0 = std::chrono::steady_clock::now();
        const auto r = run_backtest(cfg, run == 0 ? data : again);
        worst = std::max(worst, seconds_since(t0));
        texts.push_back(wealth_csv(r) + metrics_json("run", cfg, summarize(r, {})));
    }
    const bool same = texts[0] == texts[1];
    return {same && same_data && worst < kLongRunSeconds,
            fmt::format("500 stocks x 13860 days, diversity_dynamic d=500 daily: slowest run {:.1f}s (limit {:g}s), "
                        "outputs byte-identical: {}, data regenerated identically: {} (generation {:.1f}s for two)",
                        worst, kLongRunSeconds, same ? "yes" : "no", same_data ? "yes" : "no", gen_secs)};
}

Verdict full_grid() {
    const std::string grid_json = R"({"synthetic": {"seed": 1962, "n_stocks": 500, "n_days": 1300}, "grid": [
        {"portfolio": ["equal", "entropy", "diversity"], "d": [100, 300, 500],
         "trading": ["daily", "weekly", "monthly"], "renewing": ["weekly", "monthly", "quarterly"],
         "tc": [0, 0.005, 0.01], "p": 0.8, "alpha": 0.6},
        {"portfolio": "diversity_dynamic", "d": [100, 300, 500],
         "trading": ["daily", "weekly", "monthly"], "renewing": ["weekly", "monthly", "quarterly"],
         "tc": [0, 0.005, 0.01], "p": 0.8, "alpha0": 0.6, "xi": 1e-5, "beta": [0, 0.05, 0.1]}]})";
    const RunManifest m = parse_manifest(grid_json);
    const auto out = std::filesystem::temp_directory_path() / "sptc_acceptance_grid";
    std::filesystem::remove_all(out);
    const auto t0 = std::chrono::steady_clock::now();
    const MarketDataset data = manifest_market(m);
    const auto report = run_grid(m, data, {}, {out, 1});
    const double secs = seconds_since(t0);

    // Every column of the summary must carry the always-defined metrics.
    std::ifstream in(out / "summary.csv");
    std::string line;
    std::size_t rows = 0, columns = 0, empty_cells = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t k = 0; k <= line.size(); ++k) {
            if (k == line.size() || line[k] == ',') {
                cells.push_back(line.substr(start, k - start));
                start = k + 1;
            }
        }
        if (rows == 0) columns = cells.size() - 1;
        else if (cells[0] != "qv") {
            for (std::size_t c = 1; c < cells.size(); ++c) empty_cells += cells[c].empty() ? 1 : 0;
        }
        ++rows;
    }
    const std::size_t expected = 3 * 81 + 81 * 3;
    const bool ok = report.failures() == 0 && report.points.size() == expected && columns == expected &&
                    rows == 8 && empty_cells == 0;
    return {ok, fmt::format("{} grid points + {} benchmark runs on 500 stocks x 1300 days, {} failures, "
                            "summary {} rows x {} columns, {} empty cells, {:.0f}s",
                            report.points.size(), report.benchmarks.size(), report.failures(), rows, columns,
                            empty_cells, secs)};
}

}  // namespace

int main() {
    std::size_t failed = 0;
    auto report = [&](const char* name, const std::function<Verdict()>& fn) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, fmt::format("exception: {}", e.what())};
        }
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failed;
    };

    SyntheticParams shared;
    shared.seed = 31;
    shared.n_stocks = 100;
    shared.n_days = 2500;
    const MarketDataset dynamic_data = generate_market(shared);

    report("solver_equivalence", solver_equivalence);
    report("self_financing", self_financing);
    report("frictionless_oracle", frictionless_oracle);
    report("hand_trace_oracle", hand_trace);
    report("cost_monotonicity", cost_monotonicity);
    report("generator_identities", generator_identities);
    report("dynamic_alpha_invariants", [&] { return dynamic_alpha(dynamic_data); });
    report("qv_metric", [&] { return qv_metric(dynamic_data); });
    report("determinism_performance", long_run);
    report("full_grid_smoke", full_grid);
    std::printf("%zu of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
