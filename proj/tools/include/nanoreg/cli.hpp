#pragma once

#include <string>
#include <vector>

namespace nanoreg {

/// Process exit codes. Anything nonzero is accompanied by a single JSON
/// object on stderr: {"category": "...", "message": "..."}.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;  // broken invariant or unexpected failure
inline constexpr int kExitUsage = 2;     // bad command line
inline constexpr int kExitConfig = 3;    // bad config file or invalid settings
inline constexpr int kExitIo = 4;        // file system failure
inline constexpr int kExitData = 5;      // malformed or mismatched data

/// Runs one command line (program name excluded) and returns the exit code.
/// All state is local, so tests can call this repeatedly in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace nanoreg
