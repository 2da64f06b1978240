#pragma once

#include <iosfwd>

namespace dfw {

/// Exit codes of the dfw tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,      // bad flags, unreadable or malformed input
  kExitInternal = 3,   // solver failure or unexpected error
  kExitThreshold = 4,  // --check threshold unmet, or fit-demo divergence
};

/// Entry point of the dfw tool; `out` receives results, `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfw
