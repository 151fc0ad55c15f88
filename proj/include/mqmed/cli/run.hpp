// run.hpp: task orchestration behind `mqmed run` and `mqmed describe`

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mqmed/cli/config.hpp"

namespace mqmed::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitVerificationFailed = 2 };

struct RunResult {
    int exit_code{kExitOk};
    std::vector<std::string> files;  // written artifacts, in write order
};

// Runs the configured task and writes its artifacts under cfg.output.directory. Library
// errors propagate as exceptions; verification failures give kExitVerificationFailed.
RunResult run_task(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Summary of the model without evaluating any integral.
void describe_model(const RunConfig& cfg, std::ostream& out);

// File-level entry points: load, run, and map every exception to kExitError with a
// message on err.
int run_file(const std::string& path, std::ostream& out, std::ostream& err);
int describe_file(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace mqmed::cli
