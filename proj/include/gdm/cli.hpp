#pragma once

#include <ostream>

namespace gdm::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;
inline constexpr int kNumericalError = 3;

/// Entry point of the `gdm` tool. Normal output goes to `out` (or to --out
/// files), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gdm::cli
