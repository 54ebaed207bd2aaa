#include "iglu/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "iglu/error.hpp"

namespace iglu {

void AcquisitionConfig::validate() const {
    if (adc_bits < 8 || adc_bits > 24) throw usage_error("adc_bits must be within [8, 24]");
    if (averaging_count < 1) throw usage_error("averaging_count must be >= 1");
    if (!(full_scale > 0.0) || !std::isfinite(full_scale)) throw usage_error("full_scale must be positive");
    if (!(tissue_variation >= 0.0 && tissue_variation <= 1.0))
        throw usage_error("tissue_variation must lie in [0, 1]");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw usage_error("snr_db must be finite or +inf");
}

double adc_lsb(const AcquisitionConfig& cfg) {
    return cfg.full_scale / (std::ldexp(1.0, cfg.adc_bits) - 1.0);
}

double quantize_adc(double v, const AcquisitionConfig& cfg) {
    const double lsb = adc_lsb(cfg);
    const double clamped = std::clamp(v, 0.0, cfg.full_scale);
    return std::round(clamped / lsb) * lsb;
}

double coherent_average(std::span<const double> readings) {
    if (readings.empty()) throw data_error("coherent average of an empty sequence");
    return std::accumulate(readings.begin(), readings.end(), 0.0) / static_cast<double>(readings.size());
}

CohortMix CohortMix::calibration_default() {
    CohortMix m;
    const auto h = static_cast<std::size_t>(Cohort::healthy);
    const auto p = static_cast<std::size_t>(Cohort::prediabetic);
    const auto d = static_cast<std::size_t>(Cohort::diabetic);
    m.fraction[h] = 36.0 / 97.0;
    m.fraction[p] = 31.0 / 97.0;
    m.fraction[d] = 30.0 / 97.0;
    m.male_fraction[h] = 19.0 / 36.0;
    m.male_fraction[p] = 18.0 / 31.0;
    m.male_fraction[d] = 16.0 / 30.0;
    m.age_range[h] = {{{22, 65}, {17, 70}}};
    m.age_range[p] = {{{22, 65}, {26, 75}}};
    m.age_range[d] = {{{30, 68}, {30, 73}}};
    return m;
}

void CohortMix::validate() const {
    double sum = 0.0;
    for (double f : fraction) {
        if (!(f >= 0.0)) throw usage_error("cohort fractions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw usage_error("cohort fractions must sum to 1");
    for (double f : male_fraction)
        if (!(f >= 0.0 && f <= 1.0)) throw usage_error("male fraction must lie in [0, 1]");
    for (const auto& cohort : age_range)
        for (const auto& r : cohort)
            if (r[0] < kAgeMin || r[1] > kAgeMax || r[0] > r[1]) throw usage_error("invalid age range");
}

Simulator::Simulator(AcquisitionConfig cfg, ForwardModel fm) : cfg_(cfg), fm_(fm), rng_(cfg.seed) {
    cfg_.validate();
}

double Simulator::noise_stddev(int channel, double glucose, Tissue tissue) const {
    if (cfg_.noiseless()) return 0.0;
    const double v = fm_.mean_voltage(channel, glucose, tissue);
    return std::abs(v) / std::pow(10.0, cfg_.snr_db / 20.0);
}

std::vector<double> Simulator::raw_samples(int channel, double glucose, std::size_t count, Tissue tissue) {
    const double mean = fm_.mean_voltage(channel, glucose, tissue);
    const double sd = noise_stddev(channel, glucose, tissue);
    std::vector<double> out(count, mean);
    if (sd > 0.0) {
        std::normal_distribution<double> noise(0.0, sd);
        for (auto& v : out) v += noise(rng_);
    }
    return out;
}

Simulator::Tissue Simulator::draw_tissue() {
    std::normal_distribution<double> z(0.0, 1.0);
    Tissue t{};
    for (auto& f : t) f = cfg_.tissue_variation * std::clamp(z(rng_), -fm_.tissue_clip, fm_.tissue_clip);
    return t;
}

std::array<double, 3> Simulator::simulate_reading(double glucose, Tissue tissue) {
    if (!(glucose >= fm_.glucose_min && glucose <= fm_.glucose_max)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "glucose %.2f mg/dl outside simulated range [%.0f, %.0f]", glucose,
                      fm_.glucose_min, fm_.glucose_max);
        throw data_error(buf);
    }
    std::array<double, 3> v{};
    for (int ch = 0; ch < 3; ++ch) {
        const auto raw = raw_samples(ch, glucose, static_cast<std::size_t>(cfg_.averaging_count), tissue);
        v[static_cast<std::size_t>(ch)] = quantize_adc(coherent_average(raw), cfg_);
    }
    return v;
}

namespace {

constexpr std::array<std::array<double, 2>, 3> kCohortGlucose{{
    {70.0, 140.0},   // healthy
    {140.0, 200.0},  // prediabetic
    {200.0, 450.0},  // diabetic
}};

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

// Largest-remainder apportionment of n over the cohort fractions.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& f) {
    std::array<std::size_t, 3> count{};
    std::array<double, 3> rem{};
    std::size_t used = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        const double exact = f[c] * static_cast<double>(n);
        count[c] = static_cast<std::size_t>(std::floor(exact));
        rem[c] = exact - static_cast<double>(count[c]);
        used += count[c];
    }
    while (used < n) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (rem[c] > rem[best]) best = c;
        ++count[best];
        rem[best] = -1.0;
        ++used;
    }
    return count;
}

}  // namespace

Dataset Simulator::generate_dataset(std::size_t n, const CohortMix& mix, const DatasetOptions& opts) {
    if (n < 1) throw usage_error("dataset size must be >= 1");
    mix.validate();

    const auto counts = apportion(n, mix.fraction);
    std::vector<Cohort> cohorts;
    cohorts.reserve(n);
    for (std::size_t c = 0; c < 3; ++c) cohorts.insert(cohorts.end(), counts[c], static_cast<Cohort>(c));
    std::shuffle(cohorts.begin(), cohorts.end(), rng_);

    Dataset ds;
    ds.provenance = Provenance::synthetic;
    ds.records.reserve(n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> prandial(0, 2);
    const int width = std::max(4, static_cast<int>(std::to_string(n).size()));

    for (std::size_t i = 0; i < n; ++i) {
        SampleRecord r;
        r.cohort = cohorts[i];
        const auto c = static_cast<std::size_t>(r.cohort);
        r.sex = unit(rng_) < mix.male_fraction[c] ? Sex::male : Sex::female;
        const auto& ages = mix.age_range[c][static_cast<std::size_t>(r.sex)];
        r.age_years = std::uniform_int_distribution<int>(ages[0], ages[1])(rng_);
        r.prandial = static_cast<Prandial>(prandial(rng_));

        const auto [g_lo, g_hi] = kCohortGlucose[c];
        r.ref_glucose = std::clamp(round_to(g_lo + (g_hi - g_lo) * unit(rng_), 10.0), g_lo, g_hi);

        const auto v = simulate_reading(r.ref_glucose, draw_tissue());
        // Stored at CSV precision so a save/load round trip is exact.
        r.v1 = round_to(v[0], 1e6);
        r.v2 = round_to(v[1], 1e6);
        r.v3 = round_to(v[2], 1e6);

        const std::string digits = std::to_string(i + 1);
        r.sample_id = opts.id_prefix;
        if (digits.size() < static_cast<std::size_t>(width))
            r.sample_id.append(static_cast<std::size_t>(width) - digits.size(), '0');
        r.sample_id += digits;
        r.timestamp = opts.start_timestamp + static_cast<std::int64_t>(i) * opts.spacing_seconds;
        if (auto problem = validate_record(r))
            throw numeric_error("simulated record " + r.sample_id + " violates invariants: " + *problem);
        ds.records.push_back(std::move(r));
    }
    return ds;
}

}  // namespace iglu
