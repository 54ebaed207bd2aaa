#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace iglu::metrics {

// Error measures between reference (laboratory) and estimated glucose.
// All take reference first, estimate second.

double mad(std::span<const double> ref, std::span<const double> est);   // mg/dl
double mard(std::span<const double> ref, std::span<const double> est);  // percent of reference
double rmse(std::span<const double> ref, std::span<const double> est);  // mg/dl
double avge(std::span<const double> ref, std::span<const double> est);  // percent of estimate

/// Sample Pearson correlation. Throws when either vector has zero variance.
double pearson_r(std::span<const double> ref, std::span<const double> est);

/// Coefficient of determination 1 - SSE/SST of `est` as a predictor of `ref`.
/// Throws when `ref` has zero variance.
double r_squared(std::span<const double> ref, std::span<const double> est);

struct MetricsReport {
    std::size_t n = 0;
    double mad = 0.0;
    double mard = 0.0;
    double rmse = 0.0;
    double avge = 0.0;
    // Absent when undefined (n < 2 or zero variance).
    std::optional<double> pearson_r;
    std::optional<double> r_squared;
};

MetricsReport full_report(std::span<const double> ref, std::span<const double> est);

}  // namespace iglu::metrics
