#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sptc {

/// Input that violates an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent market data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure inside a backtest run, tagged with the date it happened on.
class BacktestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A diversity-weighted target came out negative. `position` indexes the
/// weight vector handed to the generator.
class NegativeWeightError : public std::runtime_error {
public:
    NegativeWeightError(std::size_t position, double weight, const std::string& what)
        : std::runtime_error(what), position_(position), weight_(weight) {}

    std::size_t position() const { return position_; }
    double weight() const { return weight_; }

private:
    std::size_t position_;
    double weight_;
};

}  // namespace sptc
