#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agentlab::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kRuntimeError = 2 };

// Entry point of the agentlab tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agentlab::cli
