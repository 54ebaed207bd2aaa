#include "iglu/logistic.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "iglu/error.hpp"
#include "iglu/regression.hpp"

namespace iglu {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

struct Curve {
    const std::vector<std::vector<double>>& z;
    const std::vector<double>& y;
    double lo;
    double span;

    double sse(const Eigen::VectorXd& theta) const {
        const auto d = static_cast<Eigen::Index>(z.front().size());
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double a = theta(d);
            for (Eigen::Index j = 0; j < d; ++j) a += theta(j) * z[i][static_cast<std::size_t>(j)];
            const double r = y[i] - (lo + span * sigmoid(a));
            s += r * r;
        }
        return s;
    }
};

}  // namespace

LogisticModel fit_logistic(const Dataset& train, ChannelSet channels, const LogisticOptions& opts) {
    if (train.size() < 10) throw data_error("logistic fit needs at least 10 samples");
    LogisticModel m;
    m.channels = channels;
    const auto rows = channel_rows(train, channels);
    m.standardization = Standardization::fit(rows);
    std::vector<std::vector<double>> z;
    z.reserve(rows.size());
    for (const auto& r : rows) z.push_back(m.standardization.apply(r));
    const auto y = train.references();

    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    m.y_min = 0.9 * *mn;
    m.y_max = 1.1 * *mx;
    const double span = m.y_max - m.y_min;
    if (!(span > 0.0)) throw data_error("degenerate target range");

    const auto d = static_cast<Eigen::Index>(z.front().size());
    const auto n = static_cast<Eigen::Index>(z.size());
    Curve curve{z, y, m.y_min, span};

    // Start flat at the mean target level.
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(y.size());
    const double p0 = std::clamp((mean_y - m.y_min) / span, 1e-6, 1.0 - 1e-6);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    theta(d) = std::log(p0 / (1.0 - p0));

    double sse = curve.sse(theta);
    double lambda = 1e-3;
    Eigen::MatrixXd J(n, d + 1);
    Eigen::VectorXd r(n);
    for (m.iterations = 0; m.iterations < opts.max_iters; ++m.iterations) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& zi = z[static_cast<std::size_t>(i)];
            double a = theta(d);
            for (Eigen::Index j = 0; j < d; ++j) a += theta(j) * zi[static_cast<std::size_t>(j)];
            const double s = sigmoid(a);
            r(i) = y[static_cast<std::size_t>(i)] - (m.y_min + span * s);
            const double ds = span * s * (1.0 - s);
            for (Eigen::Index j = 0; j < d; ++j) J(i, j) = ds * zi[static_cast<std::size_t>(j)];
            J(i, d) = ds;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;

        bool accepted = false;
        while (lambda < 1e12) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
            const Eigen::VectorXd step = A.ldlt().solve(g);
            const Eigen::VectorXd cand = theta + step;
            const double cand_sse = curve.sse(cand);
            if (std::isfinite(cand_sse) && cand_sse < sse) {
                const double rel = (sse - cand_sse) / std::max(sse, 1e-300);
                theta = cand;
                sse = cand_sse;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (rel < opts.tolerance) m.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at any damping: a stationary point.
            m.converged = true;
            break;
        }
        if (m.converged) break;
    }

    m.weights.assign(theta.data(), theta.data() + d);
    m.bias = theta(d);
    return m;
}

double predict_logistic(const LogisticModel& model, std::span<const double> x) {
    const auto z = model.standardization.apply(x);
    double a = model.bias;
    for (std::size_t j = 0; j < z.size(); ++j) a += model.weights[j] * z[j];
    return model.y_min + (model.y_max - model.y_min) * sigmoid(a);
}

std::vector<double> predict_logistic(const LogisticModel& model, const Dataset& ds) {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(predict_logistic(model, select_channels(r, model.channels)));
    return out;
}

}  // namespace iglu
