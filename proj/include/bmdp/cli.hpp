#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmdp {

/// Exit codes of the command-line driver.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitParse = 2,
    kExitConvergence = 3,
    kExitUsage = 4,
    kExitInternal = 5,
};

/// Runs one command; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bmdp
