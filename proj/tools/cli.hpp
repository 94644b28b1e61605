#pragma once

#include <ostream>

namespace repdyn::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kCheckFailed = 2;
inline constexpr int kRuntimeError = 3;

/// Parses argv, runs the selected command and writes its report bundle.
/// Check results go to `out`; usage text and errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace repdyn::cli
