#pragma once

#include <ostream>

namespace icluster::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInfeasible = 2,
  kInputError = 3,
  kVerifyFailed = 4,
};

/// Runs one subcommand (cluster, sweep, fit, gmm-compare, bench, verify).
/// Results go to --output when given, otherwise to `out`; diagnostics go
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace icluster::cli
