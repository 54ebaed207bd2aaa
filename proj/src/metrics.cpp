#include "iglu/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "iglu/error.hpp"

namespace iglu::metrics {

namespace {

void check_pair(std::span<const double> ref, std::span<const double> est) {
    if (ref.size() != est.size())
        throw data_error("length mismatch: " + std::to_string(ref.size()) + " references vs " +
                         std::to_string(est.size()) + " estimates");
    if (ref.empty()) throw data_error("empty input");
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double centered_ss(std::span<const double> v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

}  // namespace

double mad(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) s += std::abs(est[i] - ref[i]);
    return s / static_cast<double>(ref.size());
}

double mard(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!(ref[i] > 0.0)) throw data_error("non-positive reference value at index " + std::to_string(i));
        s += std::abs((est[i] - ref[i]) / ref[i]);
    }
    return 100.0 * s / static_cast<double>(ref.size());
}

double rmse(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) s += (ref[i] - est[i]) * (ref[i] - est[i]);
    return std::sqrt(s / static_cast<double>(ref.size()));
}

double avge(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!(est[i] > 0.0)) throw data_error("non-positive estimate at index " + std::to_string(i));
        s += std::abs((est[i] - ref[i]) / est[i]);
    }
    return 100.0 * s / static_cast<double>(ref.size());
}

double pearson_r(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    if (ref.size() < 2) throw data_error("correlation needs at least 2 points");
    const double mr = mean(ref);
    const double me = mean(est);
    const double sr = centered_ss(ref, mr);
    const double se = centered_ss(est, me);
    if (sr == 0.0 || se == 0.0) throw data_error("zero variance: correlation undefined");
    double sxy = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) sxy += (ref[i] - mr) * (est[i] - me);
    const double r = sxy / std::sqrt(sr * se);
    return std::clamp(r, -1.0, 1.0);
}

double r_squared(std::span<const double> ref, std::span<const double> est) {
    check_pair(ref, est);
    if (ref.size() < 2) throw data_error("r_squared needs at least 2 points");
    const double sst = centered_ss(ref, mean(ref));
    if (sst == 0.0) throw data_error("zero variance in reference: r_squared undefined");
    double sse = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) sse += (ref[i] - est[i]) * (ref[i] - est[i]);
    return 1.0 - sse / sst;
}

MetricsReport full_report(std::span<const double> ref, std::span<const double> est) {
    MetricsReport r;
    r.n = ref.size();
    r.mad = mad(ref, est);
    r.mard = mard(ref, est);
    r.rmse = rmse(ref, est);
    r.avge = avge(ref, est);
    if (r.n >= 2) {
        const double sr = centered_ss(ref, mean(ref));
        const double se = centered_ss(est, mean(est));
        if (sr > 0.0) r.r_squared = r_squared(ref, est);
        if (sr > 0.0 && se > 0.0) r.pearson_r = pearson_r(ref, est);
    }
    return r;
}

}  // namespace iglu::metrics
