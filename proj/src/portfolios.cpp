#include "sptc/portfolios.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sptc/errors.hpp"

namespace sptc {

WeightVector WeightVector::from(std::vector<double> weights, double tolerance) {
    if (weights.empty()) throw InvalidInput("weight vector is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
            throw InvalidInput(fmt::format("weight {} is negative or not finite: {}", i, weights[i]));
        }
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw InvalidInput(fmt::format("weights sum to {:.17g}, expected 1", sum));
    }
    return WeightVector(std::move(weights));
}

void DiversityConfig::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput(fmt::format("diversity degree p={} not in (0,1)", p));
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidInput(fmt::format("convexity weight alpha={} not in [0,1]", alpha));
    }
    if (delta < 1) throw InvalidInput("moving-average window delta must be at least 1");
}

WeightVector market_weights(std::span<const double> caps) {
    if (caps.size() < 2) throw InvalidInput("market weights need at least two stocks");
    double total = 0.0;
    for (double c : caps) {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw InvalidInput(fmt::format("capitalization must be positive, got {}", c));
        }
        total += c;
    }
    std::vector<double> mu(caps.size());
    for (std::size_t i = 0; i < caps.size(); ++i) mu[i] = caps[i] / total;
    return WeightVector::from(std::move(mu));
}

WeightVector target_index_tracking(const WeightVector& mu) { return mu; }

WeightVector target_equal(std::size_t d) {
    if (d < 2) throw InvalidInput(fmt::format("equal weights need d >= 2, got {}", d));
    return WeightVector::from(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

WeightVector target_entropy(const WeightVector& mu) {
    std::vector<double> pi(mu.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = mu[i];
        pi[i] = m > 0.0 ? m * std::log(m) : 0.0;
        denom += pi[i];
    }
    if (denom == 0.0) {
        throw InvalidInput("entropy weights undefined: market weights concentrated on one stock");
    }
    for (auto& x : pi) x /= denom;
    return WeightVector::from(std::move(pi));
}

WeightVector moving_average(std::span<const WeightVector> history, std::size_t delta) {
    if (history.empty()) throw InvalidInput("moving average needs at least one observation");
    if (delta < 1) throw InvalidInput("moving-average window must be at least 1");
    const std::size_t d = history.front().size();
    const std::size_t used = std::min(delta, history.size());
    const std::size_t pad = delta - used;

    std::vector<double> avg(d, 0.0);
    for (std::size_t k = history.size() - used; k < history.size(); ++k) {
        if (history[k].size() != d) throw InvalidInput("moving-average observations differ in size");
        for (std::size_t j = 0; j < d; ++j) avg[j] += history[k][j];
    }
    const auto& first = history.front();
    for (std::size_t j = 0; j < d; ++j) {
        avg[j] = (avg[j] + static_cast<double>(pad) * first[j]) / static_cast<double>(delta);
    }
    return WeightVector::from(std::move(avg), 1e-9);
}

SmoothedWeights smooth_weights(const WeightVector& mu, WeightVector lambda, double alpha) {
    if (mu.size() != lambda.size()) throw InvalidInput("smoothing inputs differ in size");
    SmoothedWeights out{std::move(lambda), std::vector<double>(mu.size())};
    for (std::size_t j = 0; j < mu.size(); ++j) {
        out.blended[j] = alpha * mu[j] + (1.0 - alpha) * out.moving_average[j];
    }
    return out;
}

WeightVector target_diversity(const WeightVector& mu, std::span<const double> mu_bar,
                              const DiversityConfig& config) {
    if (!(config.p > 0.0 && config.p <= 1.0)) {
        throw InvalidInput(fmt::format("diversity degree p={} not in (0,1)", config.p));
    }
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
        throw InvalidInput(fmt::format("convexity weight alpha={} not in [0,1]", config.alpha));
    }
    if (mu_bar.size() != mu.size()) throw InvalidInput("mu and mu_bar differ in size");

    const std::size_t d = mu.size();
    double power_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (mu[j] > 0.0 && !(mu_bar[j] > 0.0)) {
            throw InvalidInput(fmt::format("smoothed weight {} vanishes where mu is positive", j));
        }
        if (mu_bar[j] > 0.0) power_sum += std::pow(mu_bar[j], config.p);
    }

    std::vector<double> xi(d, 0.0);
    double mu_xi = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (mu[j] == 0.0) continue;
        xi[j] = config.alpha * std::pow(mu_bar[j], config.p - 1.0) / power_sum;
        mu_xi += mu[j] * xi[j];
    }

    std::vector<double> pi(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (mu[j] == 0.0) continue;
        pi[j] = mu[j] * (xi[j] - mu_xi + 1.0);
        if (pi[j] < 0.0) {
            throw NegativeWeightError(
                j, pi[j], fmt::format("diversity target for position {} is negative ({:.6g})", j, pi[j]));
        }
    }
    return WeightVector::from(std::move(pi));
}

double measure_of_diversity(const WeightVector& x, double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput(fmt::format("diversity degree p={} not in (0,1)", p));
    double s = 0.0;
    for (double v : x.values()) s += std::pow(v, p);
    return std::pow(s, 1.0 / p);
}

}  // namespace sptc
