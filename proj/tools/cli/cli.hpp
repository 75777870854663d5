#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace medsim::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

// Parses argv, prints the resolved configuration, runs the subcommand.
// Subcommands: build-tasks, train, eval, probe, stats, serve.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace medsim::cli
