#include <doctest.h>

#include <cmath>
#include <random>

#include "iglu/error.hpp"
#include "iglu/logistic.hpp"
#include "iglu/metrics.hpp"
#include "iglu/regression.hpp"
#include "iglu/svr.hpp"
#include "support.hpp"

using namespace iglu;
using iglu::test::make_record;

namespace {

Dataset line_along_v2(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v1(3.3, 4.5), v2(1.0, 4.5), v3(0.6, 4.5);
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = v2(rng);
        ds.records.push_back(make_record("L" + std::to_string(i), v1(rng), b, v3(rng), 60.0 + 80.0 * b));
    }
    return ds;
}

double rmse_of(const Dataset& ds, const std::vector<double>& pred) {
    return metrics::rmse(ds.references(), pred);
}

}  // namespace

TEST_CASE("logistic reproduces a constant target") {
    Dataset ds = line_along_v2(30, 1);
    for (auto& r : ds.records) r.ref_glucose = 150.0;
    const auto m = fit_logistic(ds, ChannelSet::rm4);
    for (double p : predict_logistic(m, ds)) CHECK(std::abs(p - 150.0) <= 0.5);
    CHECK(m.y_max > m.y_min);
}

TEST_CASE("logistic beats the mean predictor on a monotone target") {
    const Dataset ds = line_along_v2(60, 2);
    const auto m = fit_logistic(ds, ChannelSet::rm4);
    const auto ref = ds.references();
    double mean = 0;
    for (double v : ref) mean += v;
    mean /= static_cast<double>(ref.size());
    const std::vector<double> flat(ref.size(), mean);
    CHECK(rmse_of(ds, predict_logistic(m, ds)) < metrics::rmse(ref, flat));
    CHECK(m.y_min == doctest::Approx(0.9 * *std::min_element(ref.begin(), ref.end())));
    CHECK(m.y_max == doctest::Approx(1.1 * *std::max_element(ref.begin(), ref.end())));
}

TEST_CASE("logistic needs ten samples") {
    CHECK_THROWS_AS(fit_logistic(line_along_v2(9, 3), ChannelSet::rm4), Error);
}

TEST_CASE("svr on a single point stays inside the tube") {
    Dataset ds;
    ds.records.push_back(make_record("only", 3.7, 2.0, 1.9, 100.0));
    SvrParams p;
    const auto m = fit_svr(ds, ChannelSet::rm4, p);
    const auto x = select_channels(ds.records[0], ChannelSet::rm4);
    CHECK(std::abs(predict_svr(m, x) - 100.0) <= p.epsilon + 1e-9);
}

TEST_CASE("svr fits a noiseless line with large C and a thin tube") {
    const Dataset ds = line_along_v2(80, 4);
    SvrParams p;
    p.C = 1e5;
    p.epsilon = 0.1;
    const auto m = fit_svr(ds, ChannelSet::rm4, p);
    CHECK(m.converged);
    CHECK(metrics::mad(ds.references(), predict_svr(m, ds)) < 1.0);
}

TEST_CASE("svr KKT conditions") {
    const Dataset ds = test::synthetic(97, 5);
    SvrParams p;
    const auto m = fit_svr(ds, ChannelSet::rm4, p);
    CHECK(m.converged);
    CHECK(m.kkt_violation <= p.kkt_tolerance);
    CHECK(m.gamma == doctest::Approx(1.0 / 3.0));
    for (double a : m.dual_coef) CHECK(std::abs(a) <= p.C + 1e-9);

    // Samples outside the support set must sit inside the tube (plus tolerance).
    const auto pred = predict_svr(m, ds);
    const auto rows = channel_rows(ds, ChannelSet::rm4);
    std::size_t outside_support = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto z = m.standardization.apply(rows[i]);
        bool is_sv = false;
        for (const auto& sv : m.support_vectors)
            if (sv == z) is_sv = true;
        if (is_sv) continue;
        ++outside_support;
        CHECK(std::abs(pred[i] - ds.records[i].ref_glucose) <= p.epsilon + 1e-2);
    }
    MESSAGE(outside_support << " of " << ds.size() << " samples are not support vectors");
}

TEST_CASE("svr parameter validation and determinism") {
    const Dataset ds = test::synthetic(40, 6);
    SvrParams bad;
    bad.C = 0;
    CHECK_THROWS_AS(fit_svr(ds, ChannelSet::rm4, bad), Error);
    bad = {};
    bad.epsilon = -1;
    CHECK_THROWS_AS(fit_svr(ds, ChannelSet::rm4, bad), Error);

    const auto a = fit_svr(ds, ChannelSet::rm1);
    const auto b = fit_svr(ds, ChannelSet::rm1);
    CHECK(a.dual_coef == b.dual_coef);
    CHECK(a.bias == b.bias);
}
