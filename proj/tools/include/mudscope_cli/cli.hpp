#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mudscope::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kUsage = 2,
  kIncomplete = 3,
  kPortInUse = 4,
};

// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mudscope::cli
