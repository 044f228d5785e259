#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prepost {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `prepost` tool; args excludes the program name.
/// Subcommands: analyze, simulate, mc, compare.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prepost
