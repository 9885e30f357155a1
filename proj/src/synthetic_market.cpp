#include "sptc/synthetic_market.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "sptc/errors.hpp"

namespace sptc {

namespace {

constexpr double kTradingDaysPerYear = 252.0;
// Keeps the daily cap ratio inside [0.6, 1.6].
constexpr double kMinStep = -0.4;
constexpr double kMaxStep = 0.6;

class Draws {
public:
    explicit Draws(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
};

std::vector<Date> weekdays(Date start, std::size_t n) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(n);
    sys_days day{start};
    while (out.size() < n) {
        const unsigned wd = weekday{day}.iso_encoding();
        if (wd <= 5) out.emplace_back(day);
        day += days{1};
    }
    return out;
}

}  // namespace

void SyntheticParams::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidInput("synthetic params: " + msg); };
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (n_stocks < 2) fail(fmt::format("n_stocks={} must be at least 2", n_stocks));
    if (n_days < 2) fail(fmt::format("n_days={} must be at least 2", n_days));
    if (!start.ok()) fail("start date is invalid");
    if (!(drift_min <= drift_max)) fail("drift range is empty");
    if (!(vol_min > 0.0 && vol_min <= vol_max)) fail("volatilities must be positive with min <= max");
    if (!prob(dividend_prob)) fail("dividend_prob must lie in [0,1]");
    if (!(yield_min >= 0.0 && yield_min <= yield_max)) fail("yield range must be nonnegative and ordered");
    if (!prob(delist_hazard)) fail("delist_hazard must lie in [0,1]");
    if (!(delist_return_min >= -1.0 && delist_return_min <= delist_return_max)) {
        fail("delisting returns must be >= -1 and ordered");
    }
    if (!(cap_min > 0.0 && cap_min <= cap_max)) fail("cap range must be positive and ordered");
}

MarketDataset generate_market(const SyntheticParams& params) {
    params.validate();
    Draws draws(params.seed);
    std::vector<Date> dates = weekdays(params.start, params.n_days);
    const int width = std::max(4, static_cast<int>(std::to_string(params.n_stocks - 1).size()));

    std::vector<StockSeries> stocks;
    for (std::size_t slot = 0; slot < params.n_stocks; ++slot) {
        std::size_t listing_day = 0;
        for (unsigned generation = 0;; ++generation) {
            StockSeries s;
            s.id = generation == 0 ? fmt::format("S{:0{}}", slot, width)
                                   : fmt::format("S{:0{}}_{}", slot, width, generation);
            s.first_day = listing_day;

            const double drift = draws.uniform(params.drift_min, params.drift_max);
            const double vol = draws.uniform(params.vol_min, params.vol_max);
            const double log_cap = draws.uniform(std::log(params.cap_min), std::log(params.cap_max));
            const double step_mean = (drift - 0.5 * vol * vol) / kTradingDaysPerYear;
            const double step_vol = vol / std::sqrt(kTradingDaysPerYear);

            double cap = std::exp(log_cap);
            s.caps.push_back(cap);
            s.returns.push_back(0.0);

            for (std::size_t day = listing_day + 1; day < params.n_days; ++day) {
                if (draws.uniform() < params.delist_hazard) {
                    s.returns.push_back(
                        draws.uniform(params.delist_return_min, params.delist_return_max));
                    s.delisting_day = day;
                    break;
                }
                const double raw = std::exp(step_mean + step_vol * draws.normal()) - 1.0;
                const double next = cap * (1.0 + std::clamp(raw, kMinStep, kMaxStep));
                const double price_return = next / cap - 1.0;
                double yield = 0.0;
                if (draws.uniform() < params.dividend_prob) {
                    yield = draws.uniform(params.yield_min, params.yield_max);
                }
                s.caps.push_back(next);
                s.returns.push_back(price_return + yield);
                cap = next;
            }

            const auto delisted = s.delisting_day;
            stocks.push_back(std::move(s));
            if (!delisted || !params.replace_delisted) break;
            listing_day = *delisted;
        }
    }
    return MarketDataset(std::move(dates), std::move(stocks));
}

std::string dataset_digest(const MarketDataset& data) {
    const std::string csv = to_market_csv(data);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(csv.data(), csv.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) fmt::format_to(std::back_inserter(hex), "{:02x}", md[i]);
    return hex;
}

}  // namespace sptc
