#include <doctest.h>

#include <fstream>

#include "iglu/core_data.hpp"
#include "iglu/error.hpp"
#include "support.hpp"

using namespace iglu;
using iglu::test::make_record;

namespace {

const std::string kHeader = std::string(kCsvHeader) + "\n";

std::string three_rows() {
    return kHeader +
           "A1,34,female,healthy,fasting,3.600000,1.800000,1.500000,95.5,1577836800\n"
           "A2,51,male,diabetic,postprandial,3.800000,2.300000,2.400000,310.0,1577837100\n"
           "A3,45,male,prediabetic,random,3.700000,2.000000,1.900000,170.2,1577837400\n";
}

}  // namespace

TEST_CASE("well-formed file loads every row") {
    const auto loaded = parse_dataset(three_rows(), true);
    CHECK(loaded.dataset.size() == 3);
    CHECK(loaded.dropped_count == 0);
    const auto& r = loaded.dataset.records[1];
    CHECK(r.sample_id == "A2");
    CHECK(r.sex == Sex::male);
    CHECK(r.cohort == Cohort::diabetic);
    CHECK(r.prandial == Prandial::postprandial);
    CHECK(r.v3 == doctest::Approx(2.4));
    CHECK(r.timestamp == 1577837100);
}

TEST_CASE("strict mode rejects an out-of-range channel") {
    const std::string csv = kHeader + "B1,30,male,healthy,fasting,5.100000,1.800000,1.500000,95.0,0\n";
    try {
        parse_dataset(csv, true);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
        CHECK(std::string(e.what()).find("channel 1 out of range") != std::string::npos);
    }
}

TEST_CASE("lenient mode drops exactly the rows failing the range predicates") {
    std::string csv = kHeader;
    std::vector<std::array<double, 4>> rows{{5.1, 1.8, 1.5, 95},  {3.6, 1.8, 1.5, 95},  {3.6, 0.7, 1.5, 95},
                                            {3.6, 1.8, 4.71, 95}, {3.6, 1.8, 1.5, 69.9}, {3.2, 0.8, 0.5, 450}};
    std::size_t expected_bad = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = rows[i];
        const bool ok = v[0] >= 3.2 && v[0] <= 4.68 && v[1] >= 0.8 && v[1] <= 4.7 && v[2] >= 0.5 && v[2] <= 4.7 &&
                        v[3] >= 70 && v[3] <= 450;
        if (!ok) ++expected_bad;
        char line[160];
        std::snprintf(line, sizeof line, "R%zu,40,female,healthy,random,%.6f,%.6f,%.6f,%.1f,%zu\n", i, v[0], v[1],
                      v[2], v[3], i);
        csv += line;
    }
    const auto loaded = parse_dataset(csv, false);
    CHECK(loaded.dropped_count == expected_bad);
    CHECK(loaded.dataset.size() == rows.size() - expected_bad);
    CHECK_THROWS_AS(parse_dataset(csv, true), Error);
}

TEST_CASE("malformed rows and duplicates") {
    const std::string bad_voltage = kHeader + "C1,30,male,healthy,fasting,abc,1.8,1.5,95.0,0\n";
    CHECK_THROWS_AS(parse_dataset(bad_voltage, true), Error);
    CHECK_THROWS_AS(parse_dataset(bad_voltage, false), Error);

    const std::string dup = kHeader + "D1,30,male,healthy,fasting,3.6,1.8,1.5,95.0,0\n" +
                            "D1,31,male,healthy,fasting,3.6,1.8,1.5,96.0,1\n";
    CHECK_THROWS_AS(parse_dataset(dup, true), Error);
    const auto lenient = parse_dataset(dup, false);
    CHECK(lenient.dataset.size() == 1);
    CHECK(lenient.dropped_count == 1);

    CHECK_THROWS_AS(parse_dataset("sample_id,v1\nx,1\n", true), Error);
    CHECK_THROWS_AS(load_dataset("/nonexistent/dir/file.csv", true), Error);
}

TEST_CASE("save and load round trip") {
    test::TempDir dir;
    Dataset empty;
    CHECK_THROWS_WITH_AS(save_dataset(empty, dir / "e.csv"), doctest::Contains("empty dataset"), Error);

    Dataset one;
    one.records.push_back(make_record("X1", 3.612345, 1.9, 1.7, 123.4, 1600000000));
    save_dataset(one, dir / "one.csv");
    const auto back = load_dataset(dir / "one.csv", true);
    REQUIRE(back.dataset.size() == 1);
    CHECK(back.dataset.records[0] == one.records[0]);

    const Dataset ds = test::synthetic(97, 7);
    save_dataset(ds, dir / "a.csv");
    save_dataset(ds, dir / "b.csv");
    CHECK(test::slurp(dir / "a.csv") == test::slurp(dir / "b.csv"));
    const auto reloaded = load_dataset(dir / "a.csv", true);
    REQUIRE(reloaded.dataset.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(reloaded.dataset.records[i] == ds.records[i]);
    CHECK(test::slurp(dir / "a.csv").rfind(std::string(kCsvHeader) + "\n", 0) == 0);
}

TEST_CASE("cohort summary") {
    // Composition of the calibration cohort.
    Dataset ds;
    int id = 0;
    auto add = [&](Cohort c, Sex s, int count, int age) {
        for (int i = 0; i < count; ++i) {
            auto r = make_record("P" + std::to_string(id++), 3.6, 1.8, 1.5, 100);
            r.cohort = c;
            r.sex = s;
            r.age_years = age + i;
            ds.records.push_back(r);
        }
    };
    add(Cohort::prediabetic, Sex::male, 18, 30);
    add(Cohort::prediabetic, Sex::female, 13, 30);
    add(Cohort::diabetic, Sex::male, 16, 40);
    add(Cohort::diabetic, Sex::female, 14, 40);
    add(Cohort::healthy, Sex::male, 19, 20);
    add(Cohort::healthy, Sex::female, 17, 20);
    const auto s = cohort_summary(ds);
    CHECK(s.sex_total(Sex::male) == 53);
    CHECK(s.sex_total(Sex::female) == 44);
    CHECK(s.total() == 97);
    CHECK(s.cohort_total(Cohort::healthy) == 36);
    CHECK(s.cell(Cohort::diabetic, Sex::female).age_min == 40);
    CHECK(s.cell(Cohort::diabetic, Sex::female).age_max == 53);

    const auto empty = cohort_summary(Dataset{});
    CHECK(empty.total() == 0);

    // Property: cells always sum to the record count (direct recount).
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset syn = test::synthetic(20 + 13 * seed, seed);
        const auto sum = cohort_summary(syn);
        std::size_t cells = 0;
        for (const auto& row : sum.cells)
            for (const auto& cell : row) cells += cell.count;
        CHECK(cells == syn.size());
        std::size_t males = 0;
        for (const auto& r : syn.records) males += r.sex == Sex::male;
        CHECK(sum.sex_total(Sex::male) == males);
    }
}

TEST_CASE("channel sets") {
    CHECK(channel_indices(ChannelSet::rm1) == std::vector<int>{1, 2});
    CHECK(channel_indices(ChannelSet::rm2) == std::vector<int>{0, 1});
    CHECK(channel_indices(ChannelSet::rm3) == std::vector<int>{0, 2});
    CHECK(channel_indices(ChannelSet::rm4) == std::vector<int>{0, 1, 2});
    const auto r = make_record("Z", 3.5, 1.5, 2.5, 100);
    CHECK(select_channels(r, ChannelSet::rm3) == std::vector<double>{3.5, 2.5});
    CHECK(parse_channel_set("rm2") == ChannelSet::rm2);
    CHECK_FALSE(parse_channel_set("rm5").has_value());
}
