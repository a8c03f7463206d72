#pragma once

#include <iosfwd>

namespace ist {

// Exit codes of the `ist` command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitGateViolated = 1,  // split zone detected or drift above --max-drift
  kExitInputError = 2,    // unreadable, malformed or invalid input
  kExitInternalError = 3,
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ist
