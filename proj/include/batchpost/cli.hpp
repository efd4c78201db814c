#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace batchpost::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,
    kDataError = 2,
    kNotConverged = 3,
};

inline constexpr const char* kVersion = "0.1.0";
/// Relative input paths that do not exist are looked up in this directory.
inline constexpr const char* kDataDirEnv = "BATCHPOST_DATA_DIR";

/// Runs one command line (args[0] is the program name). Machine output goes
/// to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace batchpost::cli
