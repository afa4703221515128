#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smartfilter {

/// Exit statuses shared by every subcommand.
enum ExitStatus : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Entry point of the `smartfilter` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smartfilter
