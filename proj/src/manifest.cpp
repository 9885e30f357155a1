#include "sptc/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace sptc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ManifestError(fmt::format("{}: {}", path, msg));
}

/// A block field as a list; scalars become one-element lists.
std::vector<std::pair<std::string, const json*>> as_list(const json& block, const std::string& path,
                                                         const char* name) {
    std::vector<std::pair<std::string, const json*>> out;
    const auto it = block.find(name);
    if (it == block.end()) return out;
    const std::string field = fmt::format("{}.{}", path, name);
    if (it->is_array()) {
        if (it->empty()) fail(field, "list must not be empty");
        for (std::size_t i = 0; i < it->size(); ++i) {
            out.emplace_back(fmt::format("{}[{}]", field, i), &(*it)[i]);
        }
    } else {
        out.emplace_back(field, &*it);
    }
    return out;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::size_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
    const auto n = v.get<std::int64_t>();
    if (n < 0) fail(path, "must not be negative");
    return static_cast<std::size_t>(n);
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

template <class T, class Parse>
std::vector<T> values(const json& block, const std::string& path, const char* name,
                      std::vector<T> fallback, Parse parse) {
    const auto items = as_list(block, path, name);
    if (items.empty()) return fallback;
    std::vector<T> out;
    for (const auto& [p, v] : items) {
        try {
            out.push_back(parse(*v, p));
        } catch (const ManifestError&) {
            throw;
        } catch (const std::exception& e) {
            fail(p, e.what());
        }
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

SyntheticParams parse_synthetic(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    SyntheticParams s;
    for (const auto& [key, v] : j.items()) {
        const std::string p = fmt::format("{}.{}", path, key);
        if (key == "seed") s.seed = count(v, p);
        else if (key == "n_stocks") s.n_stocks = count(v, p);
        else if (key == "n_days") s.n_days = count(v, p);
        else if (key == "start") {
            try {
                s.start = parse_date(text(v, p));
            } catch (const ManifestError&) {
                throw;
            } catch (const std::exception& e) {
                fail(p, e.what());
            }
        }
        else if (key == "drift_min") s.drift_min = number(v, p);
        else if (key == "drift_max") s.drift_max = number(v, p);
        else if (key == "vol_min") s.vol_min = number(v, p);
        else if (key == "vol_max") s.vol_max = number(v, p);
        else if (key == "dividend_prob") s.dividend_prob = number(v, p);
        else if (key == "yield_min") s.yield_min = number(v, p);
        else if (key == "yield_max") s.yield_max = number(v, p);
        else if (key == "delist_hazard") s.delist_hazard = number(v, p);
        else if (key == "delist_return_min") s.delist_return_min = number(v, p);
        else if (key == "delist_return_max") s.delist_return_max = number(v, p);
        else if (key == "cap_min") s.cap_min = number(v, p);
        else if (key == "cap_max") s.cap_max = number(v, p);
        else if (key == "replace_delisted") {
            if (!v.is_boolean()) fail(p, "expected true or false");
            s.replace_delisted = v.get<bool>();
        } else {
            fail(p, "unknown field");
        }
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return s;
}

bool is_diversity(PortfolioKind k) {
    return k == PortfolioKind::diversity || k == PortfolioKind::diversity_dynamic;
}

void expand_block(const json& block, const std::string& path, double initial_wealth,
                  std::vector<GridPoint>& out) {
    if (!block.is_object()) fail(path, "expected an object");
    static const char* known[] = {"portfolio", "d",     "trading", "renewing", "tc",   "tc_buy",
                                  "tc_sell",   "p",     "alpha",   "delta",    "alpha0", "beta",
                                  "xi"};
    for (const auto& [key, v] : block.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known)) {
            fail(fmt::format("{}.{}", path, key), "unknown field");
        }
    }
    if (!block.contains("portfolio")) fail(path + ".portfolio", "required");
    if (block.contains("tc") && (block.contains("tc_buy") || block.contains("tc_sell"))) {
        fail(path + ".tc", "give either tc or tc_buy/tc_sell");
    }

    const auto kinds = values<PortfolioKind>(block, path, "portfolio", {}, [](const json& v, const std::string& p) {
        return parse_portfolio_kind(text(v, p));
    });
    const auto ds = values<std::size_t>(block, path, "d", {100}, count);
    const auto tradings = values<TradingFrequency>(block, path, "trading", {TradingFrequency::daily},
                                                   [](const json& v, const std::string& p) {
                                                       return parse_trading_frequency(text(v, p));
                                                   });
    const auto renewings = values<RenewingFrequency>(
        block, path, "renewing", {RenewingFrequency::quarterly},
        [](const json& v, const std::string& p) { return parse_renewing_frequency(text(v, p)); });

    std::vector<CostRates> rates;
    if (block.contains("tc_buy") || block.contains("tc_sell")) {
        const auto buys = values<double>(block, path, "tc_buy", {0.0}, number);
        const auto sells = values<double>(block, path, "tc_sell", {0.0}, number);
        for (double b : buys)
            for (double s : sells) rates.push_back({b, s});
    } else {
        for (double tc : values<double>(block, path, "tc", {0.0}, number)) rates.push_back(CostRates::uniform(tc));
    }

    const DiversityConfig div_default{};
    const SmoothingConfig sm_default{};
    const auto ps = values<double>(block, path, "p", {div_default.p}, number);
    const auto alphas = values<double>(block, path, "alpha", {div_default.alpha}, number);
    // 0 stands for the frequency's default window.
    const auto deltas = values<std::size_t>(block, path, "delta", {0}, [](const json& v, const std::string& p) {
        if (v.is_string() && v.get<std::string>() == "auto") return std::size_t{0};
        const std::size_t n = count(v, p);
        if (n == 0) fail(p, "must be positive or \"auto\"");
        return n;
    });
    const auto alpha0s = values<double>(block, path, "alpha0", {sm_default.alpha0}, number);
    const auto betas = values<double>(block, path, "beta", {sm_default.beta}, number);
    const auto xis = values<double>(block, path, "xi", {sm_default.xi}, number);

    std::size_t index = 0;
    for (PortfolioKind kind : kinds) {
        const bool div = is_diversity(kind);
        const bool dyn = kind == PortfolioKind::diversity_dynamic;
        const std::vector<double> kind_p = div ? ps : std::vector<double>{div_default.p};
        const std::vector<double> kind_alpha =
            kind == PortfolioKind::diversity ? alphas : std::vector<double>{div_default.alpha};
        const std::vector<std::size_t> kind_delta = div ? deltas : std::vector<std::size_t>{0};
        const std::vector<double> kind_alpha0 = dyn ? alpha0s : std::vector<double>{sm_default.alpha0};
        const std::vector<double> kind_beta = dyn ? betas : std::vector<double>{sm_default.beta};
        const std::vector<double> kind_xi = dyn ? xis : std::vector<double>{sm_default.xi};
        for (std::size_t d : ds)
            for (TradingFrequency tr : tradings)
                for (RenewingFrequency rn : renewings)
                    for (const CostRates& r : rates)
                        for (double p : kind_p)
                            for (double a : kind_alpha)
                                for (std::size_t delta : kind_delta)
                                    for (double a0 : kind_alpha0)
                                        for (double b : kind_beta)
                                            for (double xi : kind_xi) {
                                                BacktestConfig c;
                                                c.kind = kind;
                                                c.d = d;
                                                c.trading = tr;
                                                c.renewing = rn;
                                                c.rates = r;
                                                c.initial_wealth = initial_wealth;
                                                c.diversity = {p, a, delta ? delta : default_delta(tr)};
                                                c.smoothing = {a0, b, xi};
                                                try {
                                                    c.validate();
                                                } catch (const std::exception& e) {
                                                    fail(fmt::format("{} (point {})", path, index), e.what());
                                                }
                                                out.push_back({config_key(c), c});
                                                ++index;
                                            }
    }
}

}  // namespace

std::string config_key(const BacktestConfig& c) {
    std::string key = fmt::format("{}_d{}_{}_{}", to_string(c.kind), c.d, to_string(c.trading),
                                  to_string(c.renewing));
    if (c.rates.tc_buy == c.rates.tc_sell) {
        key += fmt::format("_tc{}", c.rates.tc_buy);
    } else {
        key += fmt::format("_tcb{}_tcs{}", c.rates.tc_buy, c.rates.tc_sell);
    }
    if (c.kind == PortfolioKind::diversity) {
        key += fmt::format("_p{}_a{}_delta{}", c.diversity.p, c.diversity.alpha, c.diversity.delta);
    } else if (c.kind == PortfolioKind::diversity_dynamic) {
        key += fmt::format("_p{}_delta{}_a0{}_b{}_xi{}", c.diversity.p, c.diversity.delta,
                           c.smoothing.alpha0, c.smoothing.beta, c.smoothing.xi);
    }
    return key;
}

RunManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail("$", fmt::format("not valid JSON ({})", e.what()));
    }
    if (!j.is_object()) fail("$", "expected an object");

    RunManifest m;
    double initial_wealth = 1000.0;
    std::optional<std::uint64_t> seed;
    for (const auto& [key, v] : j.items()) {
        const std::string p = "$." + key;
        if (key == "market") m.market = resolve(base_dir, text(v, p));
        else if (key == "risk_free") m.risk_free = resolve(base_dir, text(v, p));
        else if (key == "out") m.out = resolve(base_dir, text(v, p));
        else if (key == "seed") seed = count(v, p);
        else if (key == "jobs") {
            m.jobs = count(v, p);
            if (m.jobs == 0) fail(p, "must be at least 1");
        } else if (key == "initial_wealth") {
            initial_wealth = number(v, p);
            if (!(initial_wealth > 0.0)) fail(p, "must be positive");
        } else if (key == "synthetic") m.synthetic = parse_synthetic(v, p);
        else if (key == "grid") {
        } else {
            fail(p, "unknown field");
        }
    }
    if (m.market && m.synthetic) fail("$.synthetic", "give either market or synthetic, not both");
    if (!m.market && !m.synthetic) fail("$.market", "required (or a synthetic block)");
    if (seed) {
        if (!m.synthetic) fail("$.seed", "only meaningful with a synthetic block");
        m.synthetic->seed = *seed;
    }

    const auto grid = j.find("grid");
    if (grid == j.end()) fail("$.grid", "required");
    if (!grid->is_array()) fail("$.grid", "expected a list of blocks");
    for (std::size_t b = 0; b < grid->size(); ++b) {
        expand_block((*grid)[b], fmt::format("$.grid[{}]", b), initial_wealth, m.grid);
    }
    if (m.grid.empty()) fail("$.grid", "grid is empty");

    std::vector<std::string> keys;
    for (const auto& g : m.grid) keys.push_back(g.key);
    std::sort(keys.begin(), keys.end());
    const auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end()) fail("$.grid", fmt::format("configuration {} appears twice", *dup));
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError(fmt::format("{}: cannot open manifest", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

}  // namespace sptc
