#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "iglu/core_data.hpp"
#include "iglu/forward_model.hpp"

namespace iglu {

struct AcquisitionConfig {
    int adc_bits = 16;
    double full_scale = 4.096;      // volts
    double sample_rate = 128.0;     // samples per second
    int averaging_count = 128;      // raw samples per reading
    double snr_db = 25.2;           // +inf disables noise
    double noise_power = 0.08;      // reported figure; informational only
    double tissue_variation = 1.0;  // scale of per-subject tissue factors; 0 disables
    std::uint64_t seed = 0;

    void validate() const;
    bool noiseless() const { return snr_db == std::numeric_limits<double>::infinity(); }
};

double quantize_adc(double v, const AcquisitionConfig& cfg);
double adc_lsb(const AcquisitionConfig& cfg);
double coherent_average(std::span<const double> readings);

/// Fractions of healthy / prediabetic / diabetic samples plus per-cohort
/// sex ratio and age ranges used when drawing demographics.
struct CohortMix {
    std::array<double, 3> fraction{};     // indexed by Cohort
    std::array<double, 3> male_fraction{};
    // [cohort][sex] -> {min age, max age}
    std::array<std::array<std::array<int, 2>, 2>, 3> age_range{};

    /// Calibration-set composition: 36 healthy (19 M / 17 F), 31 prediabetic
    /// (18 / 13), 30 diabetic (16 / 14).
    static CohortMix calibration_default();
    void validate() const;
};

struct DatasetOptions {
    std::string id_prefix = "S";
    std::int64_t start_timestamp = 1'577'836'800;  // 2020-01-01T00:00:00Z
    std::int64_t spacing_seconds = 300;
};

/// Seeded simulator of the three-channel front end. Owns its random stream;
/// one instance must not be shared between threads.
class Simulator {
public:
    explicit Simulator(AcquisitionConfig cfg, ForwardModel fm = ForwardModel::standard());

    using Tissue = std::array<double, 2>;

    /// Raw, unaveraged, unquantized samples for one channel.
    std::vector<double> raw_samples(int channel, double glucose, std::size_t count, Tissue tissue = {});

    /// Noise-added, coherently averaged, quantized (v1, v2, v3).
    std::array<double, 3> simulate_reading(double glucose, Tissue tissue = {});

    /// Draws one subject's tissue factors (scaled by tissue_variation).
    Tissue draw_tissue();

    Dataset generate_dataset(std::size_t n, const CohortMix& mix, const DatasetOptions& opts = {});

    /// Per-sample noise standard deviation (volts) before averaging.
    double noise_stddev(int channel, double glucose, Tissue tissue = {}) const;

    const AcquisitionConfig& config() const { return cfg_; }
    const ForwardModel& forward_model() const { return fm_; }

private:
    AcquisitionConfig cfg_;
    ForwardModel fm_;
    std::mt19937_64 rng_;
};

}  // namespace iglu
