#include "support.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace iglu::test {

TempDir::TempDir() {
    static std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
        std::ostringstream name;
        name << "iglu-test-" << std::hex << rd() << rd();
        path_ = base / name.str();
        if (std::filesystem::create_directory(path_)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

SampleRecord make_record(std::string id, double v1, double v2, double v3, double glucose, std::int64_t ts) {
    SampleRecord r;
    r.sample_id = std::move(id);
    r.age_years = 40;
    r.sex = Sex::female;
    r.cohort = glucose < 140 ? Cohort::healthy : (glucose < 200 ? Cohort::prediabetic : Cohort::diabetic);
    r.prandial = Prandial::random;
    r.v1 = v1;
    r.v2 = v2;
    r.v3 = v3;
    r.ref_glucose = glucose;
    r.timestamp = ts;
    return r;
}

Dataset synthetic(std::size_t n, std::uint64_t seed, double snr_db, const std::string& prefix) {
    AcquisitionConfig cfg;
    cfg.seed = seed;
    cfg.snr_db = snr_db;
    Simulator sim(cfg);
    DatasetOptions opts;
    opts.id_prefix = prefix;
    return sim.generate_dataset(n, CohortMix::calibration_default(), opts);
}

SplitSets synthetic_pair(std::uint64_t seed, std::size_t n_train, std::size_t n_val, double snr_db) {
    AcquisitionConfig cfg;
    cfg.seed = seed;
    cfg.snr_db = snr_db;
    Simulator sim(cfg);
    SplitSets out;
    out.train = sim.generate_dataset(n_train, CohortMix::calibration_default(), {"C"});
    out.validation = sim.generate_dataset(n_val, CohortMix::calibration_default(), {"V"});
    return out;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& binary, const std::string& args) {
    const std::string cmd = "'" + binary + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

}  // namespace iglu::test
