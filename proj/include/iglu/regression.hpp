#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iglu/basis.hpp"
#include "iglu/core_data.hpp"
#include "iglu/metrics.hpp"
#include "iglu/standardization.hpp"

namespace iglu {

/// Multiple polynomial regression calibration over a channel subset.
/// Prediction: intercept + coefficients . expand(standardize(x)).
struct PolynomialModel {
    ChannelSet channels = ChannelSet::rm4;
    MonomialBasis basis;
    std::vector<double> coefficients;  // one per monomial
    double intercept = 0.0;            // mg/dl
    Standardization standardization;
    double condition_estimate = 0.0;
    std::int64_t created_utc = 0;
    std::optional<metrics::MetricsReport> training_metrics;
};

struct MprOptions {
    bool intercept = true;
    // Designs whose estimated 2-norm condition number exceeds this are refused.
    double max_condition = 1e12;
};

PolynomialModel fit_mpr(const Dataset& train, ChannelSet channels, int degree, const MprOptions& opts = {});

double predict_mpr(const PolynomialModel& model, std::span<const double> x);
double predict_mpr(const PolynomialModel& model, const SampleRecord& r);
std::vector<double> predict_mpr(const PolynomialModel& model, const Dataset& ds);

/// Design matrix of the model's basis (intercept column first when enabled)
/// evaluated on standardized channel values of every record.
Eigen::MatrixXd mpr_design(const Dataset& ds, ChannelSet channels, const MonomialBasis& basis,
                           const Standardization& standardization);

/// Warns when any input lies more than 20% outside the detector range
/// measured as a fraction of the range width.
std::optional<std::string> range_warning(ChannelSet channels, std::span<const double> x);

/// Channel rows of a dataset restricted to `channels`.
std::vector<std::vector<double>> channel_rows(const Dataset& ds, ChannelSet channels);

}  // namespace iglu
