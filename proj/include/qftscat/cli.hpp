#pragma once

#include "qftscat/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qftscat {

enum ExitCode : int { kExitPass = 0, kExitUsage = 1, kExitNumerical = 2 };

struct RunOptions {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

std::vector<std::string> command_names();

// Runs one pipeline and writes its artifacts into out_dir. Exit code 0 when the pipeline's
// acceptance check passes, 2 when it fails numerically, 1 on usage or configuration errors.
int run_command(const RunOptions& opts);
int run_command(const std::string& command, RunConfig cfg, const std::string& out_dir);

} // namespace qftscat
