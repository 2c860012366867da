#pragma once

#include <ostream>

namespace marginforge {

/// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInvalidConfig = 2,
    kExitDataError = 3,
    kExitTrainingFailure = 4,
    kExitIncompatible = 5,
    kExitCoverageFailure = 6,
    kExitCorollaryViolation = 7,
};

/// Entry point of the `marginforge` tool. Data goes to `out` (only when no
/// --out path is given), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace marginforge
