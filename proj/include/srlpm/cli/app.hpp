#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace srlpm::cli {

/// Exit codes: 0 when every requested output was written, 1 on a runtime
/// failure, 2 on a usage error. Errors go to `err` as one JSON object per line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool on `args` (program name excluded).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace srlpm::cli
