#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace idstat::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitNoConvergence = 4;

/// Runs one CLI invocation. `args` excludes the program name. Results go to
/// `out`; diagnostics go to `err` as a single `error: <code>: <message>` line.
/// IDSTAT_SEED is read from the environment.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idstat::cli
