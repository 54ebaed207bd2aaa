#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace iglu {

/// Per-column z-score parameters frozen into a fitted model.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> stddev;

    /// Column statistics of `rows` (sample standard deviation). Throws a data
    /// error if any column is constant.
    static Standardization fit(std::span<const std::vector<double>> rows);

    std::vector<double> apply(std::span<const double> x) const;
    double apply(std::size_t col, double x) const { return (x - mean[col]) / stddev[col]; }
    double invert(std::size_t col, double z) const { return z * stddev[col] + mean[col]; }

    bool operator==(const Standardization&) const = default;
};

}  // namespace iglu
