#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace fedctmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name).
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace fedctmc::cli
