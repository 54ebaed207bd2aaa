#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iglu/acquisition.hpp"
#include "iglu/core_data.hpp"

namespace iglu::test {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

SampleRecord make_record(std::string id, double v1, double v2, double v3, double glucose, std::int64_t ts = 0);

/// Calibration-style synthetic set at the default acquisition settings.
Dataset synthetic(std::size_t n, std::uint64_t seed, double snr_db = 25.2, const std::string& prefix = "S");

/// Training and validation sets drawn from one simulator stream.
struct SplitSets {
    Dataset train;
    Dataset validation;
};
SplitSets synthetic_pair(std::uint64_t seed, std::size_t n_train = 97, std::size_t n_val = 93,
                         double snr_db = 25.2);

std::string slurp(const std::filesystem::path& path);

/// Runs the CLI binary with `args`, capturing nothing. Returns the exit code.
int run_cli(const std::string& binary, const std::string& args);

}  // namespace iglu::test
