#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pccseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Output directory used when --out is absent; falls back to the working directory.
inline constexpr const char* kOutDirEnv = "PCCSEG_OUT";

/// Runs one command line (without the program name). Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Makes a running `serve` command return. Safe to call from any thread.
void request_shutdown();

}  // namespace pccseg::cli
