#include "sptc/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

PortfolioKind parse_portfolio_kind(std::string_view s) {
    if (s == "index_tracking") return PortfolioKind::index_tracking;
    if (s == "equal") return PortfolioKind::equal;
    if (s == "entropy") return PortfolioKind::entropy;
    if (s == "diversity") return PortfolioKind::diversity;
    if (s == "diversity_dynamic") return PortfolioKind::diversity_dynamic;
    throw InvalidInput(fmt::format("unknown portfolio kind '{}'", s));
}

std::string_view to_string(PortfolioKind k) {
    switch (k) {
        case PortfolioKind::index_tracking: return "index_tracking";
        case PortfolioKind::equal: return "equal";
        case PortfolioKind::entropy: return "entropy";
        case PortfolioKind::diversity: return "diversity";
        case PortfolioKind::diversity_dynamic: return "diversity_dynamic";
    }
    return "?";
}

std::size_t default_delta(TradingFrequency trading) {
    switch (trading) {
        case TradingFrequency::daily: return 250;
        case TradingFrequency::weekly: return 52;
        case TradingFrequency::monthly: return 12;
    }
    return 250;
}

void BacktestConfig::validate() const {
    if (d < 2) throw InvalidInput(fmt::format("constituent list size d={} must be at least 2", d));
    if (!(initial_wealth > 0.0) || !std::isfinite(initial_wealth)) {
        throw InvalidInput("initial wealth must be positive");
    }
    auto rate_ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r < 1.0; };
    if (!rate_ok(rates.tc_buy) || !rate_ok(rates.tc_sell)) {
        throw InvalidInput("transaction cost rates must lie in [0,1)");
    }
    if (kind == PortfolioKind::diversity) diversity.validate();
    if (kind == PortfolioKind::diversity_dynamic) {
        DiversityConfig probe = diversity;
        probe.alpha = smoothing.alpha0;
        probe.validate();
        smoothing.validate();
    }
}

ConstituentList renew_constituents(std::span<const CapEntry> caps, std::size_t d, std::size_t day) {
    if (caps.size() < d) {
        throw DataError(fmt::format("only {} listed stocks, constituent list needs {}", caps.size(), d));
    }
    std::vector<CapEntry> sorted(caps.begin(), caps.end());
    auto larger = [](const CapEntry& a, const CapEntry& b) {
        if (a.cap != b.cap) return a.cap > b.cap;
        return a.id < b.id;
    };
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(d), sorted.end(),
                      larger);
    ConstituentList list;
    list.effective_from = day;
    list.members.reserve(d);
    for (std::size_t k = 0; k < d; ++k) list.members.push_back(sorted[k].stock);
    return list;
}

ConstituentList renew_constituents(const MarketDataset& data, std::size_t day, std::size_t d) {
    std::vector<CapEntry> entries;
    entries.reserve(data.num_stocks());
    for (std::size_t i = 0; i < data.num_stocks(); ++i) {
        const auto& s = data.stock(i);
        if (s.has_cap(day)) entries.push_back({i, s.id, s.cap(day)});
    }
    return renew_constituents(entries, d, day);
}

namespace {

constexpr double kAccountingTolerance = 1e-9;

struct Book {
    std::vector<std::size_t> stocks;
    std::vector<PositionAccrual> positions;
    double cumulative_tc{0.0};
    std::vector<TradeRecord> trades;

    double market_value() const {
        double v = 0.0;
        for (const auto& p : positions) v += p.holding + p.dividends;
        return v;
    }
};

class Engine {
public:
    Engine(const BacktestConfig& config, const MarketDataset& data)
        : config_(config), data_(data), slot_(data.num_stocks(), kNoSlot) {}

    BacktestResult run();

private:
    static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

    bool dynamic() const { return config_.kind == PortfolioKind::diversity_dynamic; }
    bool diversity_kind() const {
        return config_.kind == PortfolioKind::diversity || dynamic();
    }

    void accrue(Book& book, std::size_t day) const;
    void refresh_list(std::size_t day, bool renewal);
    WeightVector moving_average_now() const;
    WeightVector targets(double alpha, std::size_t day) const;
    void initialize(Book& book, const WeightVector& pi);
    TradeRecord trade(Book& book, std::size_t day, bool renewal, const WeightVector& pi);
    std::string date(std::size_t day) const { return format_date(data_.dates()[day]); }

    const BacktestConfig& config_;
    const MarketDataset& data_;
    std::vector<std::size_t> list_;
    std::vector<std::size_t> trading_history_;
    WeightVector mu_;
    WeightVector lambda_;
    std::vector<std::size_t> slot_;
};

void Engine::accrue(Book& book, std::size_t day) const {
    for (std::size_t k = 0; k < book.stocks.size(); ++k) {
        book.positions[k].apply(day_rates(data_, book.stocks[k], day));
    }
}

void Engine::refresh_list(std::size_t day, bool renewal) {
    if (renewal) {
        list_ = renew_constituents(data_, day, config_.d).members;
    } else {
        std::erase_if(list_, [&](std::size_t s) { return !data_.stock(s).has_cap(day); });
    }
    if (list_.size() < 2) {
        throw DataError(fmt::format("constituent list has {} surviving stocks", list_.size()));
    }
    std::vector<double> caps(list_.size());
    for (std::size_t k = 0; k < list_.size(); ++k) caps[k] = data_.stock(list_[k]).cap(day);
    mu_ = market_weights(caps);
}

WeightVector Engine::moving_average_now() const {
    std::size_t earliest = 0;
    for (std::size_t s : list_) earliest = std::max(earliest, data_.stock(s).first_day);
    const std::size_t delta = config_.diversity.delta;

    std::size_t begin = trading_history_.size();
    while (begin > 0 && trading_history_.size() - begin < delta &&
           trading_history_[begin - 1] >= earliest) {
        --begin;
    }
    std::vector<WeightVector> observations;
    observations.reserve(trading_history_.size() - begin);
    std::vector<double> caps(list_.size());
    for (std::size_t h = begin; h < trading_history_.size(); ++h) {
        const std::size_t day = trading_history_[h];
        for (std::size_t k = 0; k < list_.size(); ++k) caps[k] = data_.stock(list_[k]).cap(day);
        observations.push_back(market_weights(caps));
    }
    return moving_average(observations, delta);
}

WeightVector Engine::targets(double alpha, std::size_t day) const {
    switch (config_.kind) {
        case PortfolioKind::index_tracking: return target_index_tracking(mu_);
        case PortfolioKind::equal: return target_equal(list_.size());
        case PortfolioKind::entropy: return target_entropy(mu_);
        case PortfolioKind::diversity:
        case PortfolioKind::diversity_dynamic: {
            const SmoothedWeights smoothed = smooth_weights(mu_, lambda_, alpha);
            DiversityConfig cfg = config_.diversity;
            cfg.alpha = alpha;
            try {
                return target_diversity(mu_, smoothed.blended, cfg);
            } catch (const NegativeWeightError& e) {
                throw BacktestError(fmt::format("{}: negative diversity weight {:.6g} for stock {} (alpha={})",
                                                date(day), e.weight(),
                                                data_.stock(list_[e.position()]).id, alpha));
            }
        }
    }
    throw std::logic_error("unhandled portfolio kind");
}

void Engine::initialize(Book& book, const WeightVector& pi) {
    book.stocks = list_;
    book.positions.assign(list_.size(), {});
    for (std::size_t k = 0; k < list_.size(); ++k) {
        book.positions[k].holding = config_.initial_wealth * pi[k];
    }
    TradeRecord rec;
    rec.day = 0;
    rec.traded = true;
    rec.renewal = true;
    rec.wealth_pre = config_.initial_wealth;
    rec.wealth_post = config_.initial_wealth;
    book.trades.push_back(rec);
}

TradeRecord Engine::trade(Book& book, std::size_t day, bool renewal, const WeightVector& pi) {
    // Positions of the union of held stocks and the active list.
    std::vector<std::size_t> stocks = book.stocks;
    std::vector<double> holdings(stocks.size());
    double dividends = 0.0;
    for (std::size_t k = 0; k < stocks.size(); ++k) {
        slot_[stocks[k]] = k;
        holdings[k] = book.positions[k].holding;
        dividends += book.positions[k].dividends;
    }
    const std::size_t held = stocks.size();
    std::vector<double> target(stocks.size(), 0.0);
    std::size_t held_in_list = 0;
    for (std::size_t k = 0; k < list_.size(); ++k) {
        const std::size_t s = list_[k];
        if (slot_[s] == kNoSlot) {
            slot_[s] = stocks.size();
            stocks.push_back(s);
            holdings.push_back(0.0);
            target.push_back(0.0);
        } else if (slot_[s] < held) {
            ++held_in_list;
        }
        target[slot_[s]] = pi[k];
    }
    for (std::size_t s : stocks) slot_[s] = kNoSlot;

    TradeRecord rec;
    rec.day = day;
    rec.renewal = renewal;
    rec.dividends = dividends;
    rec.wealth_pre = std::accumulate(holdings.begin(), holdings.end(), 0.0);

    const bool hold = config_.kind == PortfolioKind::index_tracking && !renewal &&
                      dividends == 0.0 && held_in_list == held;
    if (hold) {
        rec.wealth_post = rec.wealth_pre;
        book.trades.push_back(rec);
        return rec;
    }

    const RebalanceProblem problem =
        RebalanceProblem::make(holdings, dividends, std::move(target), config_.rates);
    const RebalanceOutcome out = rebalance(problem);

    double bought = 0.0;
    double sold = 0.0;
    for (std::size_t k = 0; k < stocks.size(); ++k) {
        const double delta = out.holdings_new[k] - holdings[k];
        if (delta > 0.0) bought += delta;
        else sold -= delta;
    }
    rec.traded = true;
    rec.transaction_costs = out.transaction_costs;
    rec.wealth_post = out.wealth_new;
    rec.self_financing_residual = (1.0 + config_.rates.tc_buy) * bought -
                                  (1.0 - config_.rates.tc_sell) * sold - dividends;

    const double scale = problem.wealth_prev();
    if (std::abs(rec.self_financing_residual) > kAccountingTolerance * scale) {
        throw BacktestError(fmt::format("{}: self-financing residual {:.3g} exceeds tolerance",
                                        date(day), rec.self_financing_residual));
    }
    const double expected = rec.wealth_pre + dividends - rec.transaction_costs;
    if (std::abs(rec.wealth_post - expected) > kAccountingTolerance * expected) {
        throw BacktestError(fmt::format("{}: wealth {:.17g} does not match {:.17g}", date(day),
                                        rec.wealth_post, expected));
    }
    if (!(rec.wealth_post > 0.0)) {
        throw BacktestError(fmt::format("{}: wealth is no longer positive", date(day)));
    }

    book.stocks.clear();
    book.positions.clear();
    for (std::size_t k = 0; k < stocks.size(); ++k) {
        if (problem.targets()[k] > 0.0) {
            book.stocks.push_back(stocks[k]);
            book.positions.push_back({out.holdings_new[k], 0.0});
        }
    }
    book.cumulative_tc += rec.transaction_costs;
    book.trades.push_back(rec);
    return rec;
}

BacktestResult Engine::run() {
    config_.validate();
    const std::size_t n = data_.num_days();
    const Calendar cal = build_calendar(data_.dates(), config_.trading, config_.renewing);
    std::vector<char> is_trading(n, 0);
    std::vector<char> is_renewal(n, 0);
    for (std::size_t d : cal.trading_days) is_trading[d] = 1;
    for (std::size_t d : cal.renewal_days) is_renewal[d] = 1;

    BacktestResult result;
    result.dates.assign(data_.dates().begin(), data_.dates().end());
    result.wealth.resize(n);
    result.cumulative_tc.resize(n);
    if (dynamic()) result.alpha.resize(n);

    Book book;
    Book baseline;
    std::optional<AlphaController> controller;
    if (dynamic()) controller.emplace(config_.smoothing);
    const double fixed_alpha =
        dynamic() ? config_.smoothing.alpha0 : config_.diversity.alpha;
    auto alpha_now = [&] { return controller ? controller->alpha() : fixed_alpha; };

    try {
        refresh_list(0, true);
    } catch (const std::exception& e) {
        throw BacktestError(fmt::format("{}: {}", date(0), e.what()));
    }
    trading_history_.push_back(0);
    if (diversity_kind()) lambda_ = moving_average_now();
    initialize(book, targets(alpha_now(), 0));
    if (dynamic()) {
        initialize(baseline, targets(config_.smoothing.alpha0, 0));
        controller->record_trading_day(0.0, config_.initial_wealth);
        result.alpha[0] = controller->alpha();
    }
    result.wealth[0] = config_.initial_wealth;

    for (std::size_t day = 1; day < n; ++day) {
        try {
            accrue(book, day);
            if (dynamic()) accrue(baseline, day);
            if (is_trading[day]) {
                const bool renewal = is_renewal[day] != 0;
                refresh_list(day, renewal);
                trading_history_.push_back(day);
                if (diversity_kind()) lambda_ = moving_average_now();
                if (controller && renewal) controller->on_renewal(day);
                const TradeRecord rec = trade(book, day, renewal, targets(alpha_now(), day));
                result.wealth[day] = rec.wealth_post;
                if (dynamic()) {
                    const TradeRecord base =
                        trade(baseline, day, renewal, targets(config_.smoothing.alpha0, day));
                    controller->record_trading_day(base.transaction_costs, base.wealth_pre);
                }
            } else {
                result.wealth[day] = book.market_value();
            }
        } catch (const BacktestError&) {
            throw;
        } catch (const std::exception& e) {
            throw BacktestError(fmt::format("{}: {}", date(day), e.what()));
        }
        result.cumulative_tc[day] = book.cumulative_tc;
        if (dynamic()) result.alpha[day] = controller->alpha();
    }

    if (diversity_kind()) {
        const auto& wealth_source = dynamic() ? baseline.trades : book.trades;
        std::vector<double> tc(book.trades.size());
        std::vector<double> v(book.trades.size());
        for (std::size_t k = 0; k < book.trades.size(); ++k) {
            tc[k] = book.trades[k].transaction_costs;
            v[k] = wealth_source[k].wealth_pre;
        }
        result.qv = qv_relative_tc(tc, v);
    }
    if (controller) result.diagnostics = controller->state().diagnostics;
    result.trades = std::move(book.trades);
    result.baseline_trades = std::move(baseline.trades);
    return result;
}

}  // namespace

BacktestResult run_backtest(const BacktestConfig& config, const MarketDataset& data) {
    Engine engine(config, data);
    return engine.run();
}

std::vector<double> capitalization_index(const MarketDataset& data, std::size_t d,
                                         std::span<const std::size_t> renewal_days,
                                         double initial_level) {
    if (d < 1) throw InvalidInput("capitalization index needs d >= 1");
    std::vector<char> renew(data.num_days(), 0);
    for (std::size_t r : renewal_days) {
        if (r >= data.num_days()) throw InvalidInput("renewal day outside the dataset");
        renew[r] = 1;
    }
    std::vector<std::size_t> list = renew_constituents(data, 0, d).members;
    auto level_sum = [&](std::size_t day) {
        double s = 0.0;
        for (std::size_t i : list) s += data.stock(i).cap(day);
        return s;
    };
    const double base = level_sum(0);
    std::vector<double> out(data.num_days());
    out[0] = initial_level;
    for (std::size_t day = 1; day < data.num_days(); ++day) {
        if (renew[day]) {
            list = renew_constituents(data, day, d).members;
        } else {
            std::erase_if(list, [&](std::size_t s) { return !data.stock(s).has_cap(day); });
        }
        out[day] = level_sum(day) * initial_level / base;
    }
    return out;
}

}  // namespace sptc
