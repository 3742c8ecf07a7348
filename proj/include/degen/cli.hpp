#pragma once

#include <string>
#include <vector>

namespace degen {

/// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailure = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
};

/// Runs the `degen` command line. args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace degen
