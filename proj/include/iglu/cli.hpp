#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "iglu/acquisition.hpp"
#include "iglu/dnn.hpp"
#include "iglu/error.hpp"
#include "iglu/svr.hpp"

namespace iglu::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIo = 5;

int exit_code(ErrorKind kind);

/// INI-style `key = value` settings grouped under [acquisition], [lm] and [svr].
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile load(const std::filesystem::path& path);
    static ConfigFile parse(const std::string& text);

    void apply(AcquisitionConfig& cfg) const;
    void apply(LmConfig& cfg) const;
    void apply(SvrParams& params) const;
};

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace iglu::cli
