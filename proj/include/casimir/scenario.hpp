#pragma once

#include <string>
#include <vector>

#include "casimir/config.hpp"

namespace casimir {

inline constexpr const char* tool_version = "0.3.0";

struct RunOptions {
    std::string output_dir;
    int workers = 1;
    bool plots = true;
};

struct OutputFile {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::size_t bytes;
};

enum class Outcome { success, pull_in };

struct RunManifest {
    std::string version = tool_version;
    std::string config_echo;
    double wall_clock = 0.0;  // s
    Outcome outcome = Outcome::success;
    std::vector<OutputFile> files;
};

std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
ScenarioSpec builtin_scenario(const std::string& name);

RunManifest run_scenario(const ScenarioSpec& spec, const RunOptions& opts);

}  // namespace casimir
