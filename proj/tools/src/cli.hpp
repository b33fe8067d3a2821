#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nvgyro::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitIo = 3 };

// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "NVGYRO_OUT";

// Parses argv (argv[0] is the program name), runs one subcommand and maps
// failures onto exit codes: 1 config, 2 runtime or fit, 3 I/O.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvgyro::cli
