#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fvkit {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitMissingInput = 2,
  kExitNumerical = 3,
};

// Runs the command line `args` (without the program name). Progress goes to
// `out`; failures go to `err` as one JSON object per line with the keys
// "error" (category) and "message".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fvkit
