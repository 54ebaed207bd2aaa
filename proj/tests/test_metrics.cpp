#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "iglu/error.hpp"
#include "iglu/metrics.hpp"

using namespace iglu::metrics;

namespace {
const std::vector<double> kRef{100, 200};
const std::vector<double> kEst{110, 190};
}  // namespace

TEST_CASE("worked pair") {
    CHECK(mad(kRef, kEst) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(mard(kRef, kEst) == doctest::Approx(7.5).epsilon(1e-15));
    CHECK(rmse(kRef, kEst) == doctest::Approx(10.0).epsilon(1e-15));
    const double avge_hand = (10.0 / 110.0 + 10.0 / 190.0) / 2.0 * 100.0;
    CHECK(std::abs(avge(kRef, kEst) - avge_hand) < 1e-12);
    CHECK(std::abs(avge(kRef, kEst) - 7.177033492822966) < 1e-9);
    CHECK(avge(kRef, kEst) != mard(kRef, kEst));

    const auto rep = full_report(kRef, kEst);
    CHECK(rep.n == 2);
    CHECK(rep.mad == doctest::Approx(10.0));
    CHECK(rep.mard == doctest::Approx(7.5));
}

TEST_CASE("outlier dominates rmse") {
    const std::vector<double> ref{100, 100}, est{100, 120};
    CHECK(rmse(ref, est) == doctest::Approx(std::sqrt(200.0)));
    CHECK(mad(ref, est) == doctest::Approx(10.0));
}

TEST_CASE("identity and invariances") {
    const std::vector<double> ref{80, 120, 160, 240, 300};
    const auto rep = full_report(ref, ref);
    CHECK(rep.mad == 0.0);
    CHECK(rep.mard == 0.0);
    CHECK(rep.rmse == 0.0);
    CHECK(rep.avge == 0.0);
    CHECK(*rep.pearson_r == doctest::Approx(1.0));
    CHECK(*rep.r_squared == doctest::Approx(1.0));

    std::vector<double> est{85, 110, 170, 230, 330};
    const double m = mard(ref, est);
    std::vector<double> ref_s = ref, est_s = est;
    for (auto& v : ref_s) v *= 3.7;
    for (auto& v : est_s) v *= 3.7;
    CHECK(mard(ref_s, est_s) == doctest::Approx(m).epsilon(1e-13));

    std::vector<double> ref_p{ref[3], ref[0], ref[4], ref[1], ref[2]};
    std::vector<double> est_p{est[3], est[0], est[4], est[1], est[2]};
    CHECK(mad(ref_p, est_p) == doctest::Approx(mad(ref, est)));

    std::vector<double> affine;
    for (double v : ref) affine.push_back(2.5 * v + 17);
    CHECK(pearson_r(ref, affine) == doctest::Approx(1.0));
    const double r = pearson_r(ref, est);
    std::vector<double> est_affine;
    for (double v : est) est_affine.push_back(0.3 * v + 5);
    CHECK(pearson_r(ref, est_affine) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("correlation edge cases") {
    const std::vector<double> ref{100, 150, 200};
    const std::vector<double> flat(3, 150.0);
    CHECK(r_squared(ref, flat) == doctest::Approx(0.0));
    CHECK_THROWS_AS(pearson_r(ref, flat), iglu::Error);
    const auto rep = full_report(ref, flat);
    CHECK_FALSE(rep.pearson_r.has_value());
    CHECK(rep.r_squared.has_value());

    const std::vector<double> one{100}, one_est{105};
    const auto single = full_report(one, one_est);
    CHECK_FALSE(single.pearson_r.has_value());
    CHECK_FALSE(single.r_squared.has_value());
}

TEST_CASE("precondition failures") {
    const std::vector<double> a{100, 200}, b{100};
    const std::vector<double> empty;
    CHECK_THROWS_AS(mad(a, b), iglu::Error);
    CHECK_THROWS_AS(mad(empty, empty), iglu::Error);
    const std::vector<double> zero_ref{0, 100}, est{10, 100};
    CHECK_THROWS_AS(mard(zero_ref, est), iglu::Error);
    const std::vector<double> zero_est{0, 100};
    CHECK_THROWS_AS(avge(a, zero_est), iglu::Error);
}

TEST_CASE("power-mean and non-negativity over random vectors") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> g(40.0, 500.0);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = len(rng);
        std::vector<double> ref(n), est(n);
        for (int i = 0; i < n; ++i) {
            ref[i] = g(rng);
            est[i] = g(rng);
        }
        const auto rep = full_report(ref, est);
        double abs_sum = 0.0, sq_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            abs_sum += std::abs(est[i] - ref[i]);
            sq_sum += (est[i] - ref[i]) * (est[i] - ref[i]);
        }
        CHECK(rep.mad == doctest::Approx(abs_sum / n));
        CHECK(rep.rmse == doctest::Approx(std::sqrt(sq_sum / n)));
        CHECK(rep.rmse >= rep.mad - 1e-12);
        CHECK(rep.mard > 0.0);
        CHECK(rep.avge > 0.0);
        if (rep.pearson_r) CHECK(std::abs(*rep.pearson_r) <= 1.0);
    }
}

TEST_CASE("r squared of a least-squares line equals pearson squared") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 15.0);
    std::vector<double> x, y;
    for (int i = 0; i < 60; ++i) {
        x.push_back(80 + 5 * i);
        y.push_back(0.9 * x.back() + 20 + noise(rng));
    }
    // Ordinary least squares fit of y on x, by closed form.
    double mx = 0, my = 0;
    for (int i = 0; i < 60; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= 60;
    my /= 60;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 60; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    std::vector<double> fit;
    for (double v : x) fit.push_back(my + slope * (v - mx));
    const double r = pearson_r(y, x);
    CHECK(r_squared(y, fit) == doctest::Approx(r * r).epsilon(1e-10));
}
