#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vgroove::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Runs one invocation; `args` excludes the program name. Errors are written
// to `err` as a single JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vgroove::cli
