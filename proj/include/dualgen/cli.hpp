#pragma once

#include <iosfwd>

namespace dualgen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv and runs one subcommand. Returns 0 on success, 1 on a usage
/// error, 2 when the run itself fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dualgen
