#include "iglu/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "iglu/error.hpp"

namespace iglu {

std::string_view to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

std::string_view to_string(Cohort c) {
    switch (c) {
        case Cohort::healthy: return "healthy";
        case Cohort::prediabetic: return "prediabetic";
        case Cohort::diabetic: return "diabetic";
    }
    return "?";
}

std::string_view to_string(Prandial p) {
    switch (p) {
        case Prandial::fasting: return "fasting";
        case Prandial::postprandial: return "postprandial";
        case Prandial::random: return "random";
    }
    return "?";
}

std::optional<Sex> parse_sex(std::string_view s) {
    if (s == "male") return Sex::male;
    if (s == "female") return Sex::female;
    return std::nullopt;
}

std::optional<Cohort> parse_cohort(std::string_view s) {
    if (s == "healthy") return Cohort::healthy;
    if (s == "prediabetic") return Cohort::prediabetic;
    if (s == "diabetic") return Cohort::diabetic;
    return std::nullopt;
}

std::optional<Prandial> parse_prandial(std::string_view s) {
    if (s == "fasting") return Prandial::fasting;
    if (s == "postprandial") return Prandial::postprandial;
    if (s == "random") return Prandial::random;
    return std::nullopt;
}

std::string_view to_string(ChannelSet c) {
    switch (c) {
        case ChannelSet::rm1: return "rm1";
        case ChannelSet::rm2: return "rm2";
        case ChannelSet::rm3: return "rm3";
        case ChannelSet::rm4: return "rm4";
    }
    return "?";
}

std::optional<ChannelSet> parse_channel_set(std::string_view s) {
    for (auto c : kAllChannelSets)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::vector<int> channel_indices(ChannelSet c) {
    switch (c) {
        case ChannelSet::rm1: return {1, 2};
        case ChannelSet::rm2: return {0, 1};
        case ChannelSet::rm3: return {0, 2};
        case ChannelSet::rm4: return {0, 1, 2};
    }
    return {};
}

std::vector<double> select_channels(const SampleRecord& r, ChannelSet c) {
    const auto v = r.voltages();
    std::vector<double> out;
    for (int i : channel_indices(c)) out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<double> Dataset::references() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.ref_glucose);
    return out;
}

std::optional<std::string> validate_record(const SampleRecord& r) {
    const auto v = r.voltages();
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(v[i]) || v[i] < kChannelRanges[i].lo || v[i] > kChannelRanges[i].hi)
            return "channel " + std::to_string(i + 1) + " out of range";
    }
    if (!std::isfinite(r.ref_glucose) || r.ref_glucose < kGlucoseMin || r.ref_glucose > kGlucoseMax)
        return "reference glucose out of range";
    if (r.age_years < kAgeMin || r.age_years > kAgeMax) return "age out of range";
    if (r.sample_id.empty()) return "empty sample_id";
    return std::nullopt;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

SampleRecord parse_row(std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    auto fail = [&](const std::string& what) {
        return data_error("line " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 10) throw fail("expected 10 fields, got " + std::to_string(fields.size()));

    SampleRecord r;
    r.sample_id = std::string(fields[0]);
    if (!parse_number(fields[1], r.age_years)) throw fail("malformed age_years");
    auto sex = parse_sex(fields[2]);
    if (!sex) throw fail("malformed sex");
    r.sex = *sex;
    auto cohort = parse_cohort(fields[3]);
    if (!cohort) throw fail("malformed cohort");
    r.cohort = *cohort;
    auto prandial = parse_prandial(fields[4]);
    if (!prandial) throw fail("malformed prandial");
    r.prandial = *prandial;
    if (!parse_number(fields[5], r.v1)) throw fail("malformed v1");
    if (!parse_number(fields[6], r.v2)) throw fail("malformed v2");
    if (!parse_number(fields[7], r.v3)) throw fail("malformed v3");
    if (!parse_number(fields[8], r.ref_glucose)) throw fail("malformed ref_glucose");
    if (!parse_number(fields[9], r.timestamp)) throw fail("malformed timestamp");
    return r;
}

}  // namespace

LoadedDataset parse_dataset(std::string_view csv, bool strict) {
    LoadedDataset out;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    bool header_seen = false;

    while (!csv.empty()) {
        const auto nl = csv.find('\n');
        std::string_view line = csv.substr(0, nl);
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kCsvHeader) throw data_error("unexpected CSV header");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        SampleRecord r = parse_row(line, line_no);
        std::optional<std::string> problem = validate_record(r);
        if (!problem && ids.contains(r.sample_id)) problem = "duplicate sample_id " + r.sample_id;
        if (problem) {
            if (strict) throw data_error("line " + std::to_string(line_no) + ": " + *problem);
            ++out.dropped_count;
            continue;
        }
        ids.insert(r.sample_id);
        out.dataset.records.push_back(std::move(r));
    }
    if (!header_seen) throw data_error("missing CSV header");
    out.dataset.provenance = Provenance::imported;
    return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), strict);
}

std::string format_dataset(const Dataset& ds) {
    if (ds.empty()) throw data_error("empty dataset");
    std::string out(kCsvHeader);
    out += '\n';
    char line[512];
    for (const auto& r : ds.records) {
        if (r.sample_id.find_first_of(",\n\r") != std::string::npos)
            throw data_error("sample_id contains a delimiter: " + r.sample_id);
        std::snprintf(line, sizeof line, "%s,%d,%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%lld\n", r.sample_id.c_str(),
                      r.age_years, std::string(to_string(r.sex)).c_str(), std::string(to_string(r.cohort)).c_str(),
                      std::string(to_string(r.prandial)).c_str(), r.v1, r.v2, r.v3, r.ref_glucose,
                      static_cast<long long>(r.timestamp));
        out += line;
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    const std::string text = format_dataset(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out << text;
    if (!out) throw io_error("write failed: " + path.string());
}

std::size_t CohortSummary::cohort_total(Cohort c) const {
    const auto& row = cells[static_cast<std::size_t>(c)];
    return row[0].count + row[1].count;
}

std::size_t CohortSummary::sex_total(Sex s) const {
    std::size_t n = 0;
    for (const auto& row : cells) n += row[static_cast<std::size_t>(s)].count;
    return n;
}

std::size_t CohortSummary::total() const { return sex_total(Sex::male) + sex_total(Sex::female); }

std::string CohortSummary::to_text() const {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-7s %6s %9s\n", "cohort", "sex", "count", "ages");
    os << line;
    auto ages = [](const CohortCell& c) {
        if (!c.age_min) return std::string("-");
        return std::to_string(*c.age_min) + "-" + std::to_string(*c.age_max);
    };
    for (auto c : {Cohort::prediabetic, Cohort::diabetic, Cohort::healthy}) {
        for (auto s : {Sex::male, Sex::female}) {
            const auto& cl = cell(c, s);
            std::snprintf(line, sizeof line, "%-12s %-7s %6zu %9s\n", std::string(to_string(c)).c_str(),
                          std::string(to_string(s)).c_str(), cl.count, ages(cl).c_str());
            os << line;
        }
    }
    std::snprintf(line, sizeof line, "%-12s %-7s %6zu\n%-12s %-7s %6zu\n%-12s %-7s %6zu\n", "total", "male",
                  sex_total(Sex::male), "total", "female", sex_total(Sex::female), "total", "all", total());
    os << line;
    return os.str();
}

CohortSummary cohort_summary(const Dataset& ds) {
    CohortSummary s;
    for (const auto& r : ds.records) {
        auto& cl = s.cells[static_cast<std::size_t>(r.cohort)][static_cast<std::size_t>(r.sex)];
        ++cl.count;
        cl.age_min = cl.age_min ? std::min(*cl.age_min, r.age_years) : r.age_years;
        cl.age_max = cl.age_max ? std::max(*cl.age_max, r.age_years) : r.age_years;
    }
    return s;
}

}  // namespace iglu
