#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hpl::cli {

/// Exit codes: 0 pass, 1 verification/certification failure or domain
/// rejection, 2 input error.
enum ExitCode : int { kPass = 0, kFail = 1, kInputError = 2 };

/// Runs the command line `args` (args[0] is the program name), writing
/// results to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hpl::cli
