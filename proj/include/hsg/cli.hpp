#pragma once

// The hsg command line: generate, train, eval, hist, poincare.

#include <ostream>
#include <string>
#include <vector>

namespace hsg {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // bad arguments, bad config, unreadable or unwritable files
  kExitDiverged = 2,
  kExitMismatch = 3,  // checkpoint and dataset do not belong together
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hsg
