#include <gtest/gtest.h>

#include <cmath>

#include "sptc/errors.hpp"
#include "sptc/portfolios.hpp"
#include "test_support.hpp"

using namespace sptc;
using sptc::testing::TestRng;

namespace {

WeightVector W(std::vector<double> v) { return WeightVector::from(std::move(v)); }

void expect_weights(const WeightVector& w, const std::vector<double>& expected, double tol) {
    ASSERT_EQ(w.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(w[i], expected[i], tol) << "i=" << i;
}

}  // namespace

TEST(MarketWeights, Examples) {
    expect_weights(market_weights(std::vector<double>{2, 3, 5}), {0.2, 0.3, 0.5}, 1e-15);
    expect_weights(market_weights(std::vector<double>{7, 7, 7, 7}), {0.25, 0.25, 0.25, 0.25}, 1e-15);
    expect_weights(market_weights(std::vector<double>{1, 999}), {0.001, 0.999}, 1e-15);
    EXPECT_THROW(market_weights(std::vector<double>{1}), InvalidInput);
    EXPECT_THROW(market_weights(std::vector<double>{1, 0}), InvalidInput);
}

TEST(IndexTracking, IsIdentity) {
    expect_weights(target_index_tracking(W({0.2, 0.8})), {0.2, 0.8}, 0.0);
    expect_weights(target_index_tracking(W({1.0 / 3, 1.0 / 3, 1.0 / 3})), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.0);
}

TEST(EqualWeights, Examples) {
    expect_weights(target_equal(4), {0.25, 0.25, 0.25, 0.25}, 0.0);
    expect_weights(target_equal(2), {0.5, 0.5}, 0.0);
    const auto w = target_equal(100);
    for (double x : w.values()) EXPECT_DOUBLE_EQ(x, 0.01);
    EXPECT_THROW(target_equal(1), InvalidInput);
}

TEST(EntropyWeights, Examples) {
    expect_weights(target_entropy(W({0.5, 0.5})), {0.5, 0.5}, 1e-15);
    expect_weights(target_entropy(W({0.9, 0.1})), {0.29169, 0.70831}, 5e-6);
    const auto u = target_entropy(W(std::vector<double>(7, 1.0 / 7)));
    for (double x : u.values()) EXPECT_NEAR(x, 1.0 / 7, 1e-15);
    expect_weights(target_entropy(W({0.5, 0.5, 0.0})), {0.5, 0.5, 0.0}, 1e-15);
    EXPECT_THROW(target_entropy(W({1.0, 0.0})), InvalidInput);
}

TEST(MovingAverage, Examples) {
    const auto m = W({0.3, 0.7});
    std::vector<WeightVector> constant(5, m);
    expect_weights(moving_average(constant, 3), {0.3, 0.7}, 1e-15);
    std::vector<WeightVector> two{W({0.6, 0.4}), W({0.4, 0.6})};
    expect_weights(moving_average(two, 2), {0.5, 0.5}, 1e-15);
    std::vector<WeightVector> one{W({0.1, 0.9})};
    expect_weights(moving_average(one, 250), {0.1, 0.9}, 1e-15);
}

TEST(MovingAverage, PadsWithFirstObservation) {
    std::vector<WeightVector> h{W({0.2, 0.8}), W({0.6, 0.4})};
    // window 4: two copies of the first observation, then both observations
    expect_weights(moving_average(h, 4), {(3 * 0.2 + 0.6) / 4, (3 * 0.8 + 0.4) / 4}, 1e-15);
    std::vector<WeightVector> h3{W({0.2, 0.8}), W({0.6, 0.4}), W({0.5, 0.5})};
    expect_weights(moving_average(h3, 2), {0.55, 0.45}, 1e-15);
}

TEST(DiversityWeights, ClosedFormWithFullConvexity) {
    const auto mu = W({0.8, 0.2});
    DiversityConfig cfg{0.5, 1.0, 1};
    expect_weights(target_diversity(mu, mu.values(), cfg), {2.0 / 3, 1.0 / 3}, 1e-15);
}

TEST(DiversityWeights, BoundaryCases) {
    const auto mu = W({0.5, 0.3, 0.2});
    expect_weights(target_diversity(mu, mu.values(), {1.0, 1.0, 1}), {0.5, 0.3, 0.2}, 1e-15);
    const std::vector<double> other{0.2, 0.3, 0.5};
    const auto zero = target_diversity(mu, other, {0.8, 0.0, 1});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(zero[i], mu[i]);
}

TEST(DiversityWeights, NegativeWeightIsReported) {
    // mu_bar far from any blend of mu with a moving average.
    try {
        target_diversity(W({0.5, 0.5}), std::vector<double>{0.01, 0.99}, {0.5, 1.0, 1});
        FAIL() << "expected a negative weight";
    } catch (const NegativeWeightError& e) {
        EXPECT_EQ(e.position(), 1u);
        EXPECT_LT(e.weight(), 0.0);
    }
}

TEST(DiversityWeights, BlendedInputsNeverGoNegative) {
    // With mu_bar = alpha mu + (1 - alpha) lambda the weights stay >= 0.
    TestRng rng(1);
    for (int trial = 0; trial < 5000; ++trial) {
        const std::size_t d = 2 + rng.index(30);
        std::vector<double> m(d), l(d);
        double sm = 0, sl = 0;
        for (auto& x : m) sm += (x = std::pow(rng.uniform(), 8.0) + 1e-12);
        for (auto& x : l) sl += (x = std::pow(rng.uniform(), 8.0) + 1e-12);
        for (auto& x : m) x /= sm;
        for (auto& x : l) x /= sl;
        const double alpha = rng.uniform();
        const auto s = smooth_weights(W(m), W(l), alpha);
        const auto pi = target_diversity(W(m), s.blended, {rng.uniform(0.01, 0.99), alpha, 1});
        for (double x : pi.values()) EXPECT_GE(x, 0.0);
    }
}

TEST(MeasureOfDiversity, Examples) {
    EXPECT_NEAR(measure_of_diversity(W({1.0, 0.0, 0.0}), 0.5), 1.0, 1e-15);
    EXPECT_NEAR(measure_of_diversity(W({0.25, 0.25, 0.25, 0.25}), 0.5), 4.0, 1e-14);
    TestRng rng(2);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(1 + rng.index(20));
        double s = 0;
        for (auto& v : x) s += (v = rng.uniform());
        for (auto& v : x) v /= s;
        EXPECT_GE(measure_of_diversity(W(x), rng.uniform(0.05, 0.95)), 1.0 - 1e-12);
    }
}

TEST(SmoothWeights, Blend) {
    const auto s = smooth_weights(W({0.6, 0.4}), W({0.2, 0.8}), 0.25);
    EXPECT_NEAR(s.blended[0], 0.25 * 0.6 + 0.75 * 0.2, 1e-15);
    EXPECT_NEAR(s.blended[1], 0.25 * 0.4 + 0.75 * 0.8, 1e-15);
}

TEST(Generators, SumToOneOnRandomInputs) {
    TestRng rng(3);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t d = 2 + rng.index(200);
        std::vector<double> caps(d);
        for (auto& c : caps) c = std::exp(rng.uniform(0.0, 10.0));
        const auto mu = market_weights(caps);
        const double p = rng.uniform(0.05, 0.95);
        for (const auto& w : {target_index_tracking(mu), target_equal(d), target_entropy(mu),
                              target_diversity(mu, mu.values(), {p, 1.0, 1})}) {
            double s = 0;
            for (double x : w.values()) s += x;
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}
