#include "iglu/dnn.hpp"

#include <cmath>
#include <random>

#include "iglu/error.hpp"
#include "iglu/regression.hpp"

namespace iglu {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

void check_shape(const DnnModel& m) {
    if (m.layers.size() + 1 != m.layer_sizes.size()) throw usage_error("layer list does not match layer sizes");
}

std::vector<std::vector<double>> standardized_inputs(const DnnModel& m, const Dataset& ds) {
    std::vector<std::vector<double>> z;
    z.reserve(ds.size());
    for (const auto& row : channel_rows(ds, m.channels)) z.push_back(m.input_standardization.apply(row));
    return z;
}

}  // namespace

std::size_t DnnModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l < layer_sizes.size(); ++l)
        n += static_cast<std::size_t>(layer_sizes[l]) * static_cast<std::size_t>(layer_sizes[l - 1] + 1);
    return n;
}

DnnModel init_network(std::span<const int> layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw usage_error("network needs at least an input and an output layer");
    for (int s : layer_sizes)
        if (s < 1) throw usage_error("layer sizes must be >= 1");
    if (layer_sizes.back() != 1) throw usage_error("output layer must have size 1");

    DnnModel m;
    m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    m.seed = seed;
    if (layer_sizes.front() == 2) m.channels = ChannelSet::rm2;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l - 1], out = layer_sizes[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        DnnLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.weights(r, c) = u(rng);
        for (int r = 0; r < out; ++r) layer.biases(r) = u(rng);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

void attach_standardization(DnnModel& model, const Dataset& ds) {
    const auto rows = channel_rows(ds, model.channels);
    if (rows.empty() || rows.front().size() != static_cast<std::size_t>(model.layer_sizes.front()))
        throw usage_error("network input size does not match channel set");
    model.input_standardization = Standardization::fit(rows);
    const auto y = ds.references();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(y.size() - 1));
    model.target_mean = mean;
    model.target_stddev = sd > 0.0 ? sd : 1.0;
}

Eigen::VectorXd get_parameters(const DnnModel& model) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(model.parameter_count()));
    Eigen::Index k = 0;
    for (const auto& layer : model.layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) theta(k++) = layer.weights(r, c);
        for (Eigen::Index r = 0; r < layer.biases.size(); ++r) theta(k++) = layer.biases(r);
    }
    return theta;
}

void set_parameters(DnnModel& model, const Eigen::VectorXd& theta) {
    if (static_cast<std::size_t>(theta.size()) != model.parameter_count())
        throw usage_error("parameter vector has wrong length");
    Eigen::Index k = 0;
    for (auto& layer : model.layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = theta(k++);
        for (Eigen::Index r = 0; r < layer.biases.size(); ++r) layer.biases(r) = theta(k++);
    }
}

double forward_standardized(const DnnModel& model, std::span<const double> z) {
    check_shape(model);
    if (z.size() != static_cast<std::size_t>(model.layer_sizes.front()))
        throw usage_error("expected " + std::to_string(model.layer_sizes.front()) + " inputs, got " +
                          std::to_string(z.size()));
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Eigen::VectorXd pre = model.layers[l].weights * a + model.layers[l].biases;
        if (l + 1 < model.layers.size()) pre = pre.unaryExpr([](double v) { return sigmoid(v); });
        a = std::move(pre);
    }
    return a(0);
}

double forward(const DnnModel& model, std::span<const double> x) {
    if (!model.has_standardization()) throw usage_error("network has no input standardization");
    const auto z = model.input_standardization.apply(x);
    return model.target_mean + model.target_stddev * forward_standardized(model, z);
}

std::vector<double> predict_dnn(const DnnModel& model, const Dataset& ds) {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(forward(model, select_channels(r, model.channels)));
    return out;
}

Eigen::MatrixXd residual_jacobian(const DnnModel& model, std::span<const std::vector<double>> z_batch) {
    check_shape(model);
    const auto P = static_cast<Eigen::Index>(model.parameter_count());
    const std::size_t L = model.layers.size();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(z_batch.size()), P);

    std::vector<Eigen::VectorXd> act(L + 1);
    for (std::size_t i = 0; i < z_batch.size(); ++i) {
        const auto& z = z_batch[i];
        act[0] = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::VectorXd pre = model.layers[l].weights * act[l] + model.layers[l].biases;
            if (l + 1 < L) pre = pre.unaryExpr([](double v) { return sigmoid(v); });
            act[l + 1] = std::move(pre);
        }

        // Parameter offsets per layer in the flattened vector.
        std::vector<Eigen::Index> offset(L);
        Eigen::Index k = 0;
        for (std::size_t l = 0; l < L; ++l) {
            offset[l] = k;
            k += model.layers[l].weights.size() + model.layers[l].biases.size();
        }

        Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);  // d(output)/d(pre-activation of layer l)
        for (std::size_t l = L; l-- > 0;) {
            const auto& W = model.layers[l].weights;
            const Eigen::VectorXd& in = act[l];
            Eigen::Index p = offset[l];
            for (Eigen::Index r = 0; r < W.rows(); ++r)
                for (Eigen::Index c = 0; c < W.cols(); ++c) J(static_cast<Eigen::Index>(i), p++) = -delta(r) * in(c);
            for (Eigen::Index r = 0; r < W.rows(); ++r) J(static_cast<Eigen::Index>(i), p++) = -delta(r);
            if (l > 0) {
                const Eigen::VectorXd& h = act[l];
                delta = (W.transpose() * delta).cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
            }
        }
    }
    return J;
}

LmResult train_lm(const DnnModel& model, const Dataset& train, const LmConfig& cfg) {
    if (!(cfg.lambda_init > 0.0) || !(cfg.lambda_up > 1.0) || !(cfg.lambda_down > 1.0))
        throw usage_error("LM damping must be positive with factors > 1");
    if (!model.has_standardization()) throw usage_error("network has no standardization; attach it first");
    if (train.empty()) throw data_error("empty training set");

    LmResult res;
    res.model = model;
    const auto z = standardized_inputs(model, train);
    const auto n = static_cast<Eigen::Index>(z.size());
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i)
        t(i) = (train.records[static_cast<std::size_t>(i)].ref_glucose - model.target_mean) / model.target_stddev;

    auto residuals = [&](const DnnModel& m) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = t(i) - forward_standardized(m, z[static_cast<std::size_t>(i)]);
        return r;
    };

    Eigen::VectorXd theta = get_parameters(res.model);
    Eigen::VectorXd r = residuals(res.model);
    double sse = r.squaredNorm();
    res.loss_trace.push_back(sse);
    double lambda = cfg.lambda_init;
    DnnModel trial = res.model;

    res.status = LmStatus::max_iterations;
    for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
        const Eigen::MatrixXd J = residual_jacobian(res.model, z);
        const Eigen::VectorXd g = J.transpose() * r;  // half the SSE gradient
        if (g.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            res.status = LmStatus::gradient_converged;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += lambda;
            const Eigen::VectorXd step = -A.ldlt().solve(g);
            const Eigen::VectorXd cand = theta + step;
            set_parameters(trial, cand);
            const Eigen::VectorXd cand_r = residuals(trial);
            const double cand_sse = cand_r.squaredNorm();
            if (std::isfinite(cand_sse) && cand_sse < sse) {
                theta = cand;
                r = cand_r;
                sse = cand_sse;
                res.model = trial;
                res.loss_trace.push_back(sse);
                lambda /= cfg.lambda_down;
                accepted = true;
            } else {
                lambda *= cfg.lambda_up;
                if (lambda > cfg.lambda_max) break;
            }
        }
        if (!accepted) {
            res.status = LmStatus::damping_overflow;
            break;
        }
    }
    return res;
}

LmResult fit_dnn(const Dataset& train, ChannelSet channels, std::span<const int> hidden, const LmConfig& cfg) {
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(channel_indices(channels).size()));
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    DnnModel m = init_network(sizes, cfg.seed);
    m.channels = channels;
    attach_standardization(m, train);
    return train_lm(m, train, cfg);
}

}  // namespace iglu
