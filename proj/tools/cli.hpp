#pragma once

#include <ostream>

namespace gecmetric::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kCheckerFailure = 3;

// Runs the command line. Summary tables go to `out`, logs and errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gecmetric::cli
