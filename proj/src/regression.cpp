#include "iglu/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "iglu/error.hpp"

namespace iglu {

Standardization Standardization::fit(std::span<const std::vector<double>> rows) {
    if (rows.size() < 2) throw data_error("standardization needs at least 2 rows");
    const std::size_t d = rows.front().size();
    Standardization s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    for (auto& m : s.mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    for (std::size_t j = 0; j < d; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(rows.size() - 1));
        if (!(s.stddev[j] > 0.0) || !std::isfinite(s.stddev[j]))
            throw data_error("column " + std::to_string(j + 1) + " has zero variance");
    }
    return s;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
    if (x.size() != mean.size())
        throw usage_error("expected " + std::to_string(mean.size()) + " inputs, got " + std::to_string(x.size()));
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = apply(j, x[j]);
    return z;
}

std::vector<std::vector<double>> channel_rows(const Dataset& ds, ChannelSet channels) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ds.size());
    for (const auto& r : ds.records) {
        rows.push_back(select_channels(r, channels));
        for (double v : rows.back())
            if (!std::isfinite(v)) throw data_error("non-finite voltage in sample " + r.sample_id);
    }
    return rows;
}

Eigen::MatrixXd mpr_design(const Dataset& ds, ChannelSet channels, const MonomialBasis& basis,
                           const Standardization& standardization) {
    const auto rows = channel_rows(ds, channels);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(basis.feature_count()));
    std::vector<double> feat(basis.feature_count());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto z = standardization.apply(rows[i]);
        expand_into(basis, z, feat);
        for (std::size_t j = 0; j < feat.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = feat[j];
    }
    return X;
}

PolynomialModel fit_mpr(const Dataset& train, ChannelSet channels, int degree, const MprOptions& opts) {
    const auto idx = channel_indices(channels);
    PolynomialModel m;
    m.channels = channels;
    m.basis = build_basis(static_cast<int>(idx.size()), degree, opts.intercept);

    const std::size_t p = m.basis.feature_count();
    if (train.size() < m.basis.monomials.size() + 1)
        throw data_error("too few samples: " + std::to_string(train.size()) + " < " +
                         std::to_string(m.basis.monomials.size() + 1) + " required for degree " +
                         std::to_string(degree));

    const auto rows = channel_rows(train, channels);
    m.standardization = Standardization::fit(rows);
    const Eigen::MatrixXd X = mpr_design(train, channels, m.basis, m.standardization);
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) y(static_cast<Eigen::Index>(i)) = train.records[i].ref_glucose;

    // Column-pivoted QR: |R| diagonal is non-increasing, so its first/last
    // ratio is a cheap lower estimate of cond(X).
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const auto R = qr.matrixR();
    const double r_max = std::abs(R(0, 0));
    const double r_min = std::abs(R(static_cast<Eigen::Index>(p) - 1, static_cast<Eigen::Index>(p) - 1));
    m.condition_estimate = r_min > 0.0 ? r_max / r_min : std::numeric_limits<double>::infinity();
    if (!(m.condition_estimate <= opts.max_condition)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "rank-deficient design matrix (condition estimate %.3e)",
                      m.condition_estimate);
        throw numeric_error(buf);
    }
    const Eigen::VectorXd beta = qr.solve(y);

    std::size_t j = 0;
    if (opts.intercept) m.intercept = beta(static_cast<Eigen::Index>(j++));
    m.coefficients.reserve(m.basis.monomials.size());
    for (; j < p; ++j) m.coefficients.push_back(beta(static_cast<Eigen::Index>(j)));

    for (const auto& r : train.records) m.created_utc = std::max(m.created_utc, r.timestamp);
    const auto ref = train.references();
    const auto est = predict_mpr(m, train);
    bool positive = std::all_of(est.begin(), est.end(), [](double v) { return v > 0.0; });
    if (positive) m.training_metrics = metrics::full_report(ref, est);
    return m;
}

double predict_mpr(const PolynomialModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.basis.n_vars))
        throw usage_error("model " + std::string(to_string(model.channels)) + " expects " +
                          std::to_string(model.basis.n_vars) + " channels, got " + std::to_string(x.size()));
    const auto z = model.standardization.apply(x);
    MonomialBasis no_icpt = model.basis;
    no_icpt.include_intercept = false;
    const auto f = expand(no_icpt, z);
    double y = model.intercept;
    for (std::size_t j = 0; j < f.size(); ++j) y += model.coefficients[j] * f[j];
    return y;
}

double predict_mpr(const PolynomialModel& model, const SampleRecord& r) {
    const auto x = select_channels(r, model.channels);
    return predict_mpr(model, x);
}

std::vector<double> predict_mpr(const PolynomialModel& model, const Dataset& ds) {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(predict_mpr(model, r));
    return out;
}

std::optional<std::string> range_warning(ChannelSet channels, std::span<const double> x) {
    const auto idx = channel_indices(channels);
    for (std::size_t k = 0; k < idx.size() && k < x.size(); ++k) {
        const auto range = kChannelRanges[static_cast<std::size_t>(idx[k])];
        const double slack = 0.2 * (range.hi - range.lo);
        if (x[k] < range.lo - slack || x[k] > range.hi + slack) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "channel %d voltage %.4f V is far outside %.2f-%.2f V", idx[k] + 1, x[k],
                          range.lo, range.hi);
            return std::string(buf);
        }
    }
    return std::nullopt;
}

}  // namespace iglu
