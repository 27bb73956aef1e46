#pragma once

#include <iosfwd>

namespace platcomp {

//! Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInvalidInput = 2, kExitNotConverged = 3 };

//! Entry point of the command-line tool; all output goes to out and err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace platcomp
