#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iglu/core_data.hpp"
#include "iglu/standardization.hpp"

namespace iglu {

struct DnnLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd biases;   // out
};

/// Fully connected network: sigmoid hidden layers, one linear output.
/// Inputs are z-scored channel voltages; the output is a z-scored glucose
/// value mapped back to mg/dl through the target statistics.
struct DnnModel {
    ChannelSet channels = ChannelSet::rm4;
    std::vector<int> layer_sizes;  // input, hidden..., 1
    std::vector<DnnLayer> layers;
    Standardization input_standardization;
    double target_mean = 0.0;
    double target_stddev = 1.0;
    std::uint64_t seed = 0;

    std::size_t parameter_count() const;
    bool has_standardization() const { return !input_standardization.mean.empty(); }
};

/// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
DnnModel init_network(std::span<const int> layer_sizes, std::uint64_t seed);

/// Freezes input and target statistics from `ds` into the model.
void attach_standardization(DnnModel& model, const Dataset& ds);

/// Flattened parameters: per layer, weights row-major then biases.
Eigen::VectorXd get_parameters(const DnnModel& model);
void set_parameters(DnnModel& model, const Eigen::VectorXd& theta);

/// Network output on the standardized scale for standardized inputs.
double forward_standardized(const DnnModel& model, std::span<const double> z);

/// Estimated glucose in mg/dl for raw channel voltages.
double forward(const DnnModel& model, std::span<const double> x);
std::vector<double> predict_dnn(const DnnModel& model, const Dataset& ds);

/// Row i holds d(residual_i)/d(theta) with residual = target - output on the
/// standardized scale, computed by reverse accumulation.
Eigen::MatrixXd residual_jacobian(const DnnModel& model, std::span<const std::vector<double>> z_batch);

struct LmConfig {
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    int max_iters = 200;
    double grad_tol = 1e-6;
    double lambda_max = 1e10;
    std::uint64_t seed = 0;
};

enum class LmStatus { gradient_converged, max_iterations, damping_overflow };

struct LmResult {
    DnnModel model;
    std::vector<double> loss_trace;  // SSE (standardized) at start and after each accepted step
    int iterations = 0;
    LmStatus status = LmStatus::max_iterations;
    bool diverged() const { return status == LmStatus::damping_overflow; }
};

/// Levenberg-Marquardt on the sum of squared standardized residuals. The
/// model must carry standardization (see attach_standardization).
LmResult train_lm(const DnnModel& model, const Dataset& train, const LmConfig& cfg);

/// init_network + attach_standardization + train_lm.
LmResult fit_dnn(const Dataset& train, ChannelSet channels, std::span<const int> hidden, const LmConfig& cfg);

}  // namespace iglu
