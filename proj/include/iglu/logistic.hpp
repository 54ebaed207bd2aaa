#pragma once

#include <span>
#include <vector>

#include "iglu/core_data.hpp"
#include "iglu/standardization.hpp"

namespace iglu {

/// Rescaled-sigmoid calibration curve:
///   y = y_min + (y_max - y_min) * sigmoid(weights . z + bias)
/// with z the standardized channel values.
struct LogisticModel {
    ChannelSet channels = ChannelSet::rm4;
    std::vector<double> weights;
    double bias = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    Standardization standardization;
    int iterations = 0;
    bool converged = false;
};

struct LogisticOptions {
    int max_iters = 200;
    double tolerance = 1e-10;  // relative SSE change
};

/// Damped Gauss-Newton fit. Non-convergence is not an error: the best
/// iterate is returned with `converged == false`.
LogisticModel fit_logistic(const Dataset& train, ChannelSet channels, const LogisticOptions& opts = {});

double predict_logistic(const LogisticModel& model, std::span<const double> x);
std::vector<double> predict_logistic(const LogisticModel& model, const Dataset& ds);

}  // namespace iglu
