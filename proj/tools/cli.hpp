#pragma once

#include <ostream>
#include <span>
#include <string>

namespace momo {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,  // every frame pair failed to estimate
};

/// Runs the `momo` tool with `args` (program name excluded).
/// Subcommands: estimate, landscape, simulate, eval.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace momo
