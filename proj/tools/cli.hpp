#pragma once

// The superfact command-line tool, callable in-process for testing.

#include <iosfwd>
#include <string>
#include <vector>

namespace superfact::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBreach = 3;
inline constexpr int kExitStepFailure = 4;
inline constexpr int kExitNoSolution = 5;

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superfact::cli
