#include "iglu/svr.hpp"

#include <cmath>
#include <limits>

#include "iglu/error.hpp"
#include "iglu/regression.hpp"

namespace iglu {

namespace {

constexpr double kTau = 1e-12;

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::exp(-gamma * d2);
}

// Dual over 2l variables: beta[t] for t < l is alpha_t, for t >= l alpha*_{t-l}.
// sign[t] = +1 / -1 respectively; Q[s][t] = sign[s] sign[t] K(s mod l, t mod l).
class SmoSolver {
public:
    SmoSolver(std::span<const std::vector<double>> x, std::span<const double> y, const SvrParams& p)
        : x_(x), l_(x.size()), C_(p.C), gamma_(p.gamma), beta_(2 * l_, 0.0), grad_(2 * l_), sign_(2 * l_),
          row_i_(2 * l_), row_j_(2 * l_) {
        for (std::size_t t = 0; t < l_; ++t) {
            sign_[t] = 1;
            sign_[t + l_] = -1;
            grad_[t] = p.epsilon - y[t];
            grad_[t + l_] = p.epsilon + y[t];
        }
    }

    void run(long max_iters, double tol, SvrModel& out) {
        long iter = 0;
        double gap = 0.0;
        for (; iter < max_iters; ++iter) {
            std::size_t i = 0, j = 0;
            gap = select(i, j);
            if (gap < tol) break;
            update(i, j);
        }
        out.iterations = iter;
        out.kkt_violation = iter < max_iters ? gap : current_gap();
        out.converged = iter < max_iters;
        out.bias = -rho();
    }

    double coefficient(std::size_t t) const { return beta_[t] - beta_[t + l_]; }

private:

    void fill_row(std::size_t i, std::vector<double>& row) const {
        for (std::size_t t = 0; t < l_; ++t) {
            const double k = rbf(x_[i % l_], x_[t], gamma_);
            row[t] = sign_[i] * k;
            row[t + l_] = -sign_[i] * k;
        }
    }

    bool upper(std::size_t t) const { return beta_[t] >= C_; }
    bool lower(std::size_t t) const { return beta_[t] <= 0.0; }

    double current_gap() {
        std::size_t i = 0, j = 0;
        return select(i, j);
    }

    // Returns the maximal-violating-pair gap; i, j receive the working set.
    double select(std::size_t& i_out, std::size_t& j_out) {
        const std::size_t n = 2 * l_;
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t gmax_idx = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (sign_[t] == 1) {
                if (!upper(t) && -grad_[t] >= gmax) {
                    gmax = -grad_[t];
                    gmax_idx = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!lower(t) && grad_[t] >= gmax) {
                gmax = grad_[t];
                gmax_idx = static_cast<std::ptrdiff_t>(t);
            }
        }

        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t gmin_idx = -1;
        double obj_min = std::numeric_limits<double>::infinity();
        const std::size_t i = gmax_idx < 0 ? 0 : static_cast<std::size_t>(gmax_idx);
        if (gmax_idx >= 0) fill_row(i, row_i_);
        const double qd_i = 1.0;  // K(x, x) = 1 for the RBF kernel

        for (std::size_t t = 0; t < n; ++t) {
            if (sign_[t] == 1) {
                if (!lower(t)) {
                    const double diff = gmax + grad_[t];
                    gmax2 = std::max(gmax2, grad_[t]);
                    if (diff > 0.0 && gmax_idx >= 0) {
                        double quad = qd_i + 1.0 - 2.0 * sign_[i] * row_i_[t];
                        if (quad <= 0.0) quad = kTau;
                        const double obj = -(diff * diff) / quad;
                        if (obj <= obj_min) {
                            gmin_idx = static_cast<std::ptrdiff_t>(t);
                            obj_min = obj;
                        }
                    }
                }
            } else if (!upper(t)) {
                const double diff = gmax - grad_[t];
                gmax2 = std::max(gmax2, -grad_[t]);
                if (diff > 0.0 && gmax_idx >= 0) {
                    double quad = qd_i + 1.0 + 2.0 * sign_[i] * row_i_[t];
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) {
                        gmin_idx = static_cast<std::ptrdiff_t>(t);
                        obj_min = obj;
                    }
                }
            }
        }
        const double gap = gmax + gmax2;
        if (gmin_idx < 0) return std::isfinite(gap) ? std::min(gap, 0.0) : 0.0;
        i_out = i;
        j_out = static_cast<std::size_t>(gmin_idx);
        return gap;
    }

    void update(std::size_t i, std::size_t j) {
        fill_row(j, row_j_);
        const double Ci = C_, Cj = C_;
        const double old_i = beta_[i], old_j = beta_[j];
        double& ai = beta_[i];
        double& aj = beta_[j];
        const double qij = row_i_[j];

        if (sign_[i] != sign_[j]) {
            double quad = 2.0 + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) { aj = 0.0; ai = diff; }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > Ci - Cj) {
                if (ai > Ci) { ai = Ci; aj = Ci - diff; }
            } else if (aj > Cj) {
                aj = Cj;
                ai = Cj + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > Ci) {
                if (ai > Ci) { ai = Ci; aj = sum - Ci; }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > Cj) {
                if (aj > Cj) { aj = Cj; ai = sum - Cj; }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double di = ai - old_i, dj = aj - old_j;
        for (std::size_t t = 0; t < 2 * l_; ++t) grad_[t] += row_i_[t] * di + row_j_[t] * dj;
    }

    double rho() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        int n_free = 0;
        for (std::size_t t = 0; t < 2 * l_; ++t) {
            const double yg = sign_[t] * grad_[t];
            if (upper(t)) {
                if (sign_[t] == -1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (lower(t)) {
                if (sign_[t] == 1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        return n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
    }

    std::span<const std::vector<double>> x_;
    std::size_t l_;
    double C_;
    double gamma_;
    std::vector<double> beta_;
    std::vector<double> grad_;
    std::vector<int> sign_;
    std::vector<double> row_i_;
    std::vector<double> row_j_;
};

}  // namespace

SvrModel fit_svr_rows(std::span<const std::vector<double>> z, std::span<const double> y, const SvrParams& params) {
    if (!(params.C > 0.0)) throw usage_error("SVR C must be positive");
    if (!(params.epsilon >= 0.0)) throw usage_error("SVR epsilon must be non-negative");
    if (z.empty() || z.size() != y.size()) throw data_error("SVR needs matching, non-empty inputs");
    if (z.size() > 5000) throw data_error("SVR dense solver limited to 5000 samples");

    SvrModel m;
    m.C = params.C;
    m.epsilon = params.epsilon;
    m.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(z.front().size());
    SvrParams p = params;
    p.gamma = m.gamma;

    SmoSolver solver(z, y, p);
    solver.run(params.max_iters, params.kkt_tolerance, m);
    for (std::size_t t = 0; t < z.size(); ++t) {
        const double c = solver.coefficient(t);
        if (c != 0.0) {
            m.support_vectors.push_back(z[t]);
            m.dual_coef.push_back(c);
        }
    }
    return m;
}

SvrModel fit_svr(const Dataset& train, ChannelSet channels, const SvrParams& params) {
    const auto rows = channel_rows(train, channels);
    Standardization s;
    if (rows.size() >= 2) {
        s = Standardization::fit(rows);
    } else {
        // A single sample has no spread; keep it at the origin of a unit scale.
        s.mean = rows.empty() ? std::vector<double>{} : rows.front();
        s.stddev.assign(s.mean.size(), 1.0);
    }
    std::vector<std::vector<double>> z;
    z.reserve(rows.size());
    for (const auto& r : rows) z.push_back(s.apply(r));
    const auto y = train.references();
    SvrModel m = fit_svr_rows(z, y, params);
    m.channels = channels;
    m.standardization = std::move(s);
    return m;
}

double predict_svr(const SvrModel& model, std::span<const double> x) {
    const auto z = model.standardization.apply(x);
    double f = model.bias;
    for (std::size_t k = 0; k < model.support_vectors.size(); ++k)
        f += model.dual_coef[k] * rbf(model.support_vectors[k], z, model.gamma);
    return f;
}

std::vector<double> predict_svr(const SvrModel& model, const Dataset& ds) {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(predict_svr(model, select_channels(r, model.channels)));
    return out;
}

}  // namespace iglu
