#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cgne::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args excludes the program name). Everything the
/// command prints goes to out / err; the return value is the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The compiled-in contents of the shipped defaults file.
const char* defaults_text();

}  // namespace cgne::cli
