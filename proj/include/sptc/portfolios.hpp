#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sptc {

/// Long-only weights over the current constituent list.
class WeightVector {
public:
    WeightVector() = default;

    /// Checks nonnegativity and that the entries sum to one within `tolerance`.
    static WeightVector from(std::vector<double> weights, double tolerance = 1e-12);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double> release() && { return std::move(values_); }

private:
    explicit WeightVector(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

struct DiversityConfig {
    double p{0.8};
    double alpha{1.0};
    std::size_t delta{250};

    void validate() const;
};

struct SmoothedWeights {
    WeightVector moving_average;
    std::vector<double> blended;
};

/// mu_j = S_j / sum S_i.
WeightVector market_weights(std::span<const double> caps);

WeightVector target_index_tracking(const WeightVector& mu);

WeightVector target_equal(std::size_t d);

/// pi_j proportional to mu_j log mu_j. Zero entries get weight zero.
WeightVector target_entropy(const WeightVector& mu);

/// Average of the last `delta` observations; when fewer exist the missing
/// early ones are filled with the first observation.
WeightVector moving_average(std::span<const WeightVector> history, std::size_t delta);

/// alpha * mu + (1 - alpha) * lambda.
SmoothedWeights smooth_weights(const WeightVector& mu, WeightVector lambda, double alpha);

/// Diversity-weighted targets on the smoothed weights mu_bar. Throws
/// NegativeWeightError if any target comes out negative.
WeightVector target_diversity(const WeightVector& mu, std::span<const double> mu_bar,
                              const DiversityConfig& config);

/// (sum x_i^p)^(1/p).
double measure_of_diversity(const WeightVector& x, double p);

}  // namespace sptc
