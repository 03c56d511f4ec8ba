#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tactile::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 2 validation error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tactile::cli
