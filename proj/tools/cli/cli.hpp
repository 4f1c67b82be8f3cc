#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bdsurvey::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

/// Runs the command line `bdsurvey <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bdsurvey::cli
