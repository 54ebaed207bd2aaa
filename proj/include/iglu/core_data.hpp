#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iglu {

enum class Sex { male, female };
enum class Cohort { healthy, prediabetic, diabetic };
enum class Prandial { fasting, postprandial, random };
enum class Provenance { synthetic, imported };

std::string_view to_string(Sex s);
std::string_view to_string(Cohort c);
std::string_view to_string(Prandial p);
std::optional<Sex> parse_sex(std::string_view s);
std::optional<Cohort> parse_cohort(std::string_view s);
std::optional<Prandial> parse_prandial(std::string_view s);

// Detector measurement ranges (volts) and the device's glucose range (mg/dl).
struct ChannelRange {
    double lo;
    double hi;
};
inline constexpr std::array<ChannelRange, 3> kChannelRanges{{{3.2, 4.68}, {0.8, 4.7}, {0.5, 4.7}}};
inline constexpr double kGlucoseMin = 70.0;
inline constexpr double kGlucoseMax = 450.0;
inline constexpr int kAgeMin = 1;
inline constexpr int kAgeMax = 120;

/// One measurement: channel 1 is 1300 nm absorption, channel 2 is 940 nm
/// absorption and channel 3 is 940 nm reflectance.
struct SampleRecord {
    std::string sample_id;
    int age_years = 0;
    Sex sex = Sex::male;
    Cohort cohort = Cohort::healthy;
    Prandial prandial = Prandial::fasting;
    double v1 = 0.0;
    double v2 = 0.0;
    double v3 = 0.0;
    double ref_glucose = 0.0;
    std::int64_t timestamp = 0;

    std::array<double, 3> voltages() const { return {v1, v2, v3}; }

    bool operator==(const SampleRecord&) const = default;
};

struct Dataset {
    std::vector<SampleRecord> records;
    Provenance provenance = Provenance::imported;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::vector<double> references() const;
};

/// Channel subsets studied for calibration.
enum class ChannelSet { rm1, rm2, rm3, rm4 };

inline constexpr std::array<ChannelSet, 4> kAllChannelSets{ChannelSet::rm1, ChannelSet::rm2, ChannelSet::rm3,
                                                           ChannelSet::rm4};

std::string_view to_string(ChannelSet c);  // "rm1".."rm4"
std::optional<ChannelSet> parse_channel_set(std::string_view s);
/// Zero-based channel indices: RM1 = {1,2}, RM2 = {0,1}, RM3 = {0,2}, RM4 = {0,1,2}.
std::vector<int> channel_indices(ChannelSet c);
std::vector<double> select_channels(const SampleRecord& r, ChannelSet c);

/// Returns a description of the first invariant the record violates, if any.
std::optional<std::string> validate_record(const SampleRecord& r);

struct LoadedDataset {
    Dataset dataset;
    std::size_t dropped_count = 0;
};

inline constexpr std::string_view kCsvHeader =
    "sample_id,age_years,sex,cohort,prandial,v1,v2,v3,ref_glucose,timestamp";

/// Reads the sample CSV. Strict mode throws on the first invariant violation
/// or duplicate id; lenient mode drops such rows and counts them. Rows that do
/// not parse at all are an error in both modes.
LoadedDataset load_dataset(const std::filesystem::path& path, bool strict);
LoadedDataset parse_dataset(std::string_view csv, bool strict);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
std::string format_dataset(const Dataset& ds);

struct CohortCell {
    std::size_t count = 0;
    std::optional<int> age_min;
    std::optional<int> age_max;
};

/// Counts by cohort x sex, indexed [cohort][sex] in enum order.
struct CohortSummary {
    std::array<std::array<CohortCell, 2>, 3> cells{};

    const CohortCell& cell(Cohort c, Sex s) const {
        return cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
    }
    std::size_t cohort_total(Cohort c) const;
    std::size_t sex_total(Sex s) const;
    std::size_t total() const;
    std::string to_text() const;
};

CohortSummary cohort_summary(const Dataset& ds);

}  // namespace iglu
