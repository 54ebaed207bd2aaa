#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "iglu/acquisition.hpp"
#include "iglu/error.hpp"
#include "iglu/metrics.hpp"
#include "iglu/regression.hpp"
#include "support.hpp"

using namespace iglu;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double variance(const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}
}  // namespace

TEST_CASE("quantization") {
    AcquisitionConfig cfg;
    CHECK(quantize_adc(0.0, cfg) == 0.0);
    CHECK(std::abs(quantize_adc(cfg.full_scale / 2, cfg) - cfg.full_scale / 2) <= 62.5e-6);
    CHECK(quantize_adc(9.9, cfg) == cfg.full_scale);
    CHECK(quantize_adc(-1.0, cfg) == 0.0);
    const double lsb = adc_lsb(cfg);
    for (double v = 0.0; v < cfg.full_scale; v += 0.0123) {
        const double q = quantize_adc(v, cfg);
        CHECK(std::abs(q - v) <= lsb / 2 + 1e-15);
        const double steps = q / lsb;
        CHECK(std::abs(steps - std::round(steps)) < 1e-6);
    }
    cfg.adc_bits = 7;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.adc_bits = 16;
    cfg.averaging_count = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("coherent averaging") {
    const std::vector<double> c(7, 2.5);
    CHECK(coherent_average(c) == 2.5);
    const std::vector<double> two{1.0, 2.0};
    CHECK(coherent_average(two) == 1.5);
    CHECK_THROWS_AS(coherent_average(std::vector<double>{}), Error);

    AcquisitionConfig cfg;
    cfg.seed = 17;
    Simulator sim(cfg);
    const double g = 180.0;
    const double sigma = sim.noise_stddev(1, g);
    for (std::size_t n : {4u, 16u, 128u}) {
        std::vector<double> means;
        for (int trial = 0; trial < 3000; ++trial) means.push_back(coherent_average(sim.raw_samples(1, g, n)));
        const double ratio = variance(means) / (sigma * sigma / static_cast<double>(n));
        CAPTURE(n);
        CHECK(ratio > 0.8);
        CHECK(ratio < 1.2);
    }
}

TEST_CASE("pre-averaging SNR matches the configuration") {
    AcquisitionConfig cfg;
    cfg.seed = 3;
    Simulator sim(cfg);
    for (int ch = 0; ch < 3; ++ch) {
        const double g = 250.0;
        const double mean = sim.forward_model().mean_voltage(ch, g);
        const auto s = sim.raw_samples(ch, g, 10000);
        double noise = 0;
        for (double v : s) noise += (v - mean) * (v - mean);
        noise /= static_cast<double>(s.size());
        const double snr = 10 * std::log10(mean * mean / noise);
        CHECK(std::abs(snr - cfg.snr_db) <= 0.5);
    }
}

TEST_CASE("forward model") {
    const auto fm = ForwardModel::standard();
    for (int ch = 0; ch < 3; ++ch) {
        double prev = -1;
        for (double g = 70; g <= 450; g += 0.5) {
            const double v = fm.mean_voltage(ch, g);
            CHECK(v > prev);
            prev = v;
            // Inside the detector range even at the extreme tissue factors.
            for (double s : {-3.0, 3.0})
                for (double t : {-3.0, 3.0}) {
                    const double vt = fm.mean_voltage(ch, g, {s, t});
                    CHECK(vt >= kChannelRanges[ch].lo);
                    CHECK(vt <= kChannelRanges[ch].hi);
                }
        }
    }
    // The channel sum does not depend on the tissue factors.
    const auto a = fm.mean_voltages(200, {0, 0});
    const auto b = fm.mean_voltages(200, {2.1, -1.4});
    CHECK(a[0] + a[1] + a[2] == doctest::Approx(b[0] + b[1] + b[2]).epsilon(1e-14));
}

TEST_CASE("readings") {
    AcquisitionConfig cfg;
    cfg.snr_db = kInf;
    cfg.seed = 1;
    Simulator quiet(cfg);
    for (double g : {70.0, 123.4, 450.0}) {
        const auto v = quiet.simulate_reading(g);
        for (int ch = 0; ch < 3; ++ch) CHECK(v[ch] == quantize_adc(quiet.forward_model().mean_voltage(ch, g), cfg));
    }
    CHECK_THROWS_AS(quiet.simulate_reading(69.9), Error);
    CHECK_THROWS_AS(quiet.simulate_reading(450.1), Error);

    AcquisitionConfig noisy;
    noisy.seed = 99;
    Simulator s1(noisy), s2(noisy);
    CHECK(s1.simulate_reading(200) == s2.simulate_reading(200));
}

TEST_CASE("dataset generation") {
    const Dataset ds = test::synthetic(97, 42);
    CHECK(ds.size() == 97);
    CHECK(ds.provenance == Provenance::synthetic);
    const auto s = cohort_summary(ds);
    CHECK(std::abs(static_cast<int>(s.cohort_total(Cohort::prediabetic)) - 31) <= 2);
    CHECK(std::abs(static_cast<int>(s.cohort_total(Cohort::diabetic)) - 30) <= 2);
    CHECK(std::abs(static_cast<int>(s.cohort_total(Cohort::healthy)) - 36) <= 2);
    for (const auto& r : ds.records) {
        CHECK_FALSE(validate_record(r).has_value());
        switch (r.cohort) {
            case Cohort::healthy: CHECK((r.ref_glucose >= 70 && r.ref_glucose <= 140)); break;
            case Cohort::prediabetic: CHECK((r.ref_glucose >= 140 && r.ref_glucose <= 200)); break;
            case Cohort::diabetic: CHECK((r.ref_glucose >= 200 && r.ref_glucose <= 450)); break;
        }
    }
    const Dataset again = test::synthetic(97, 42);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.records[i] == again.records[i]);

    const Dataset one = test::synthetic(1, 5);
    test::TempDir dir;
    save_dataset(one, dir / "one.csv");
    CHECK(load_dataset(dir / "one.csv", true).dataset.size() == 1);

    CohortMix bad = CohortMix::calibration_default();
    bad.fraction = {0.5, 0.5, 0.5};
    AcquisitionConfig cfg;
    Simulator sim(cfg);
    CHECK_THROWS_AS(sim.generate_dataset(10, bad), Error);
    CHECK_THROWS_AS(sim.generate_dataset(0, CohortMix::calibration_default()), Error);
}

TEST_CASE("noiseless data is inside the cubic model class") {
    const Dataset ds = test::synthetic(97, 21, kInf);
    const auto m = fit_mpr(ds, ChannelSet::rm4, 3);
    CHECK(metrics::mard(ds.references(), predict_mpr(m, ds)) < 0.1);
}
