#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayestomo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitImpossibleData = 3;

/// Runs one command line (args[0] is the program name). Results go to the
/// output directory; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bayestomo::cli
