#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace epialign::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 2 usage or format error, 3 degenerate data.
enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kDegenerate = 3 };

/// Runs the `epialign` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epialign::cli
