#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace iglu::clarke {

enum class Zone { A, B, C, D, E };

char to_char(Zone z);

/// Clarke error grid zone of one (reference, predicted) pair in mg/dl.
/// Rules are tried in the order A, E, C, D; anything left is B, so ties on
/// a boundary resolve to the more favourable zone. Throws on non-positive input.
Zone classify_zone(double ref, double pred);

struct CegPoint {
    double ref = 0.0;
    double pred = 0.0;
    Zone zone = Zone::A;
};

struct CegReport {
    std::vector<CegPoint> points;
    std::array<std::size_t, 5> counts{};  // indexed by Zone
    double percent_ab = 0.0;

    std::size_t count(Zone z) const { return counts[static_cast<std::size_t>(z)]; }
    std::string to_text() const;
};

CegReport ceg_report(std::span<const double> ref, std::span<const double> pred);

/// Standalone 800x800 SVG with both axes spanning 0-400 mg/dl. Points beyond
/// the plot are clamped for display only.
std::string render_svg(const CegReport& report);
void ceg_svg(const CegReport& report, const std::filesystem::path& path);

/// CSV with header `ref,pred,zone`.
std::string render_csv(const CegReport& report);
void ceg_csv(const CegReport& report, const std::filesystem::path& path);

}  // namespace iglu::clarke
