#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lossylearn::cli {

enum ExitCode : int { kOk = 0, kComputeFailure = 1, kUsage = 2, kViolation = 3 };

/// Runs one command line (args exclude the program name). Results go to the
/// --out file or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a,b,c" or "lo:hi:num" (num evenly spaced points including both ends).
std::vector<double> parse_grid(const std::string& spec);

}  // namespace lossylearn::cli
