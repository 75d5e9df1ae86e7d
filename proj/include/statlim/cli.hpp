#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace statlim::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitTimeout = 4;

/// Runs `statlim <subcommand> [options]`; `args` excludes the program name.
/// Subcommands: generate | fit | sweep | cost | bench.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace statlim::cli
