#pragma once

#include <string>

namespace bistable::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    bool deterministic = true;
};

// Runs the mapped module operations, writes CSV/JSON results plus a
// provenance file. Exit codes: 0 success, 2 validation failure, 3 numerical
// failure.
int dispatch(const RunManifest& manifest);

int run_cli(int argc, char** argv);

}  // namespace bistable::cli
