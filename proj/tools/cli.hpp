#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cayley::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kInput = 3, kNumerical = 4 };

/// Runs one command. On failure a single line
///   error category=<usage|input|numerical|internal> message="..."
/// goes to `err` and the matching exit code is returned.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, char** argv);

}  // namespace cayley::cli
