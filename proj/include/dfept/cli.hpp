#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfept {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitUsage = 2 };

/// Entry point of the `dfept` tool: extract | embed | train | eval | grid | export-dot.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace dfept
