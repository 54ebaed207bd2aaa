#include "iglu/clarke.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iglu/error.hpp"

namespace iglu::clarke {

char to_char(Zone z) { return static_cast<char>('A' + static_cast<int>(z)); }

Zone classify_zone(double ref, double pred) {
    if (!(ref > 0.0) || !(pred > 0.0) || !std::isfinite(ref) || !std::isfinite(pred))
        throw data_error("Clarke grid needs positive glucose values");

    if ((ref < 70.0 && pred < 70.0) || std::abs(pred - ref) <= 0.2 * ref) return Zone::A;
    if ((ref <= 70.0 && pred >= 180.0) || (ref >= 180.0 && pred <= 70.0)) return Zone::E;
    if ((ref >= 70.0 && ref <= 290.0 && pred >= ref + 110.0) ||
        (ref >= 130.0 && ref <= 180.0 && pred <= (7.0 / 5.0) * ref - 182.0))
        return Zone::C;
    if ((ref >= 240.0 && pred >= 70.0 && pred <= 180.0) || (ref <= 175.0 / 3.0 && pred >= 70.0 && pred <= 180.0) ||
        (ref >= 175.0 / 3.0 && ref <= 70.0 && pred >= (6.0 / 5.0) * ref))
        return Zone::D;
    return Zone::B;
}

CegReport ceg_report(std::span<const double> ref, std::span<const double> pred) {
    if (ref.size() != pred.size())
        throw data_error("length mismatch: " + std::to_string(ref.size()) + " references vs " +
                         std::to_string(pred.size()) + " predictions");
    if (ref.empty()) throw data_error("empty input");
    CegReport r;
    r.points.reserve(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const Zone z = classify_zone(ref[i], pred[i]);
        r.points.push_back({ref[i], pred[i], z});
        ++r.counts[static_cast<std::size_t>(z)];
    }
    r.percent_ab = 100.0 * static_cast<double>(r.count(Zone::A) + r.count(Zone::B)) / static_cast<double>(ref.size());
    return r;
}

std::string CegReport::to_text() const {
    std::ostringstream os;
    char line[96];
    const double n = points.empty() ? 1.0 : static_cast<double>(points.size());
    for (int z = 0; z < 5; ++z) {
        std::snprintf(line, sizeof line, "zone %c %6zu %7.2f%%\n", 'A' + z, counts[static_cast<std::size_t>(z)],
                      100.0 * static_cast<double>(counts[static_cast<std::size_t>(z)]) / n);
        os << line;
    }
    std::snprintf(line, sizeof line, "A+B    %6zu %7.2f%%\n", counts[0] + counts[1], percent_ab);
    os << line;
    return os.str();
}

namespace {

constexpr double kSize = 800.0;
constexpr double kMargin = 60.0;
constexpr double kRange = 400.0;
constexpr double kScale = (kSize - 2.0 * kMargin) / kRange;

double px(double ref) { return kMargin + std::clamp(ref, 0.0, kRange) * kScale; }
double py(double pred) { return kSize - kMargin - std::clamp(pred, 0.0, kRange) * kScale; }

const char* zone_colour(Zone z) {
    switch (z) {
        case Zone::A: return "#2e7d32";
        case Zone::B: return "#1565c0";
        case Zone::C: return "#f9a825";
        case Zone::D: return "#ef6c00";
        case Zone::E: return "#c62828";
    }
    return "#000000";
}

void line(std::ostringstream& os, double x0, double y0, double x1, double y1, const char* extra = "") {
    char buf[200];
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"%s/>\n", px(x0), py(y0),
                  px(x1), py(y1), extra);
    os << buf;
}

void text(std::ostringstream& os, double x, double y, const std::string& s, const char* attrs) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" %s>%s</text>\n", x, y, attrs, s.c_str());
    os << buf;
}

}  // namespace

std::string render_svg(const CegReport& report) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" "
          "viewBox=\"0 0 800 800\">\n"
          "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";

    // Axes and ticks.
    os << "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
    line(os, 0, 0, kRange, 0);
    line(os, 0, 0, 0, kRange);
    line(os, kRange, 0, kRange, kRange);
    line(os, 0, kRange, kRange, kRange);
    os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#000000\">\n";
    for (int v = 0; v <= 400; v += 50) {
        text(os, px(v), kSize - kMargin + 18.0, std::to_string(v), "text-anchor=\"middle\"");
        text(os, kMargin - 8.0, py(v) + 4.0, std::to_string(v), "text-anchor=\"end\"");
    }
    text(os, kSize / 2.0, kSize - 15.0, "Reference glucose (mg/dl)", "text-anchor=\"middle\"");
    text(os, 18.0, kSize / 2.0, "Predicted glucose (mg/dl)",
         "text-anchor=\"middle\" transform=\"rotate(-90 18 400)\"");
    os << "</g>\n";

    // Zone boundaries.
    os << "<g stroke=\"#000000\" stroke-width=\"1.2\" fill=\"none\">\n";
    line(os, 0, 0, kRange, kRange, " stroke-dasharray=\"4 4\" stroke=\"#888888\"");
    line(os, 0, 70, 175.0 / 3.0, 70);
    line(os, 175.0 / 3.0, 70, kRange / 1.2, kRange);
    line(os, 70, 84, 70, kRange);
    line(os, 0, 180, 70, 180);
    line(os, 70, 180, 290, kRange);
    line(os, 70, 0, 70, 56);
    line(os, 70, 56, kRange, 320);
    line(os, 180, 0, 180, 70);
    line(os, 180, 70, kRange, 70);
    line(os, 240, 70, 240, 180);
    line(os, 240, 180, kRange, 180);
    line(os, 130, 0, 180, 70);
    os << "</g>\n";

    os << "<g font-family=\"sans-serif\" font-size=\"18\" font-weight=\"bold\" fill=\"#444444\">\n";
    const std::array<std::array<double, 2>, 9> label_at{
        {{30, 15}, {370, 260}, {280, 370}, {160, 370}, {160, 15}, {30, 140}, {370, 120}, {30, 370}, {370, 15}}};
    const char labels[] = "ABBCCDDEE";
    for (std::size_t k = 0; k < label_at.size(); ++k)
        text(os, px(label_at[k][0]), py(label_at[k][1]), std::string(1, labels[k]), "text-anchor=\"middle\"");
    os << "</g>\n";

    os << "<g stroke=\"#000000\" stroke-width=\"0.5\">\n";
    char buf[160];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n", px(p.ref),
                      py(p.pred), zone_colour(p.zone));
        os << buf;
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out << body;
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace

void ceg_svg(const CegReport& report, const std::filesystem::path& path) { write_file(path, render_svg(report)); }

std::string render_csv(const CegReport& report) {
    std::string out = "ref,pred,zone\n";
    char buf[96];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%c\n", p.ref, p.pred, to_char(p.zone));
        out += buf;
    }
    return out;
}

void ceg_csv(const CegReport& report, const std::filesystem::path& path) { write_file(path, render_csv(report)); }

}  // namespace iglu::clarke
