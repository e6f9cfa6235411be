#pragma once

#include <string>
#include <vector>

namespace ptkk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "PTKK_OUTPUT_DIR";

/// Entry point of the `ptkk` tool. `args[0]` is the program name.
/// Writes CSV tables and `<command>.manifest.json` to the output directory
/// and a one-line summary to stdout. Returns the process exit code.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

const char* version();

}  // namespace ptkk::cli
