#pragma once

// Command-line front end, callable in-process so tests can drive it.

#include <iosfwd>
#include <string>
#include <vector>

namespace idelog::cli {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumeric = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idelog::cli
