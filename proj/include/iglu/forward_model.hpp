#pragma once

#include <array>
#include <cstddef>

namespace iglu {

/// Synthetic glucose-to-voltage transfer used by the simulator.
///
/// NOT a physical model of the detectors: none of these numbers were
/// measured. They exist so calibration can be tested against a known truth.
///
/// With u = (g - 70) / 380 for g in mg/dl over [70, 450], channel k reads
///   v_k = offset + linear * u + cubic * u^3 + tissue_k . (s, t)
/// where (s, t) are per-subject tissue factors, standard normal clipped to
/// +-3. At s = t = 0 each channel is strictly increasing in glucose.
///
/// The tissue loadings are orthogonal to (1, 1, 1) and the cubic vector lies
/// in their span, so v1 + v2 + v3 is exactly affine in glucose: a degree-3
/// model over all three channels contains the generator, while any two
/// channels cannot cancel both tissue factors.
struct ChannelCurve {
    double offset;
    double linear;
    double cubic;
    std::array<double, 2> tissue;  // volts per unit tissue factor
};

struct ForwardModel {
    std::array<ChannelCurve, 3> channels;
    double glucose_min = 70.0;
    double glucose_max = 450.0;
    double tissue_clip = 3.0;

    static constexpr ForwardModel standard() {
        return ForwardModel{{{
            {3.50, 0.30, 0.05, {0.050, 0.025}},     // 1300 nm absorption:  3.50 -> 3.85 V
            {1.60, 1.00, -0.25, {0.075, -0.125}},   // 940 nm absorption:   1.60 -> 2.35 V
            {1.30, 1.20, 0.20, {-0.125, 0.100}},    // 940 nm reflectance:  1.30 -> 2.70 V
        }}};
    }

    constexpr double normalized(double glucose) const {
        return (glucose - glucose_min) / (glucose_max - glucose_min);
    }

    constexpr double mean_voltage(int channel, double glucose, std::array<double, 2> tissue = {0.0, 0.0}) const {
        const auto& c = channels[static_cast<std::size_t>(channel)];
        const double u = normalized(glucose);
        return c.offset + c.linear * u + c.cubic * u * u * u + c.tissue[0] * tissue[0] + c.tissue[1] * tissue[1];
    }

    constexpr std::array<double, 3> mean_voltages(double glucose, std::array<double, 2> tissue = {0.0, 0.0}) const {
        return {mean_voltage(0, glucose, tissue), mean_voltage(1, glucose, tissue), mean_voltage(2, glucose, tissue)};
    }
};

}  // namespace iglu
