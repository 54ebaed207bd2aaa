#pragma once

#include <span>
#include <vector>

#include "iglu/core_data.hpp"
#include "iglu/standardization.hpp"

namespace iglu {

struct SvrParams {
    double C = 100.0;
    double epsilon = 5.0;  // tube half-width, mg/dl
    double gamma = 0.0;    // RBF width; <= 0 selects 1 / n_channels
    double kkt_tolerance = 1e-3;
    long max_iters = 1'000'000;
};

/// Epsilon-insensitive support vector regression with an RBF kernel on
/// standardized channel values. f(x) = sum_i dual_coef_i K(sv_i, x) + bias.
struct SvrModel {
    ChannelSet channels = ChannelSet::rm4;
    Standardization standardization;
    std::vector<std::vector<double>> support_vectors;  // standardized
    std::vector<double> dual_coef;                      // alpha_i - alpha_i^*, |.| <= C
    double bias = 0.0;
    double gamma = 0.0;
    double C = 0.0;
    double epsilon = 0.0;
    long iterations = 0;
    double kkt_violation = 0.0;  // maximal violating-pair gap at exit
    bool converged = false;
};

/// Solves the dual QP by sequential minimal optimization with second-order
/// working-set selection. A stall at max_iters returns the current iterate
/// with converged == false and the remaining KKT gap.
SvrModel fit_svr(const Dataset& train, ChannelSet channels, const SvrParams& params = {});

/// Same solver on raw (already standardized) feature rows.
SvrModel fit_svr_rows(std::span<const std::vector<double>> z, std::span<const double> y, const SvrParams& params);

double predict_svr(const SvrModel& model, std::span<const double> x);
std::vector<double> predict_svr(const SvrModel& model, const Dataset& ds);

}  // namespace iglu
