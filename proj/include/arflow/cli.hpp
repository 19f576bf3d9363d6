#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "arflow/error.hpp"

namespace arflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitNonFinite = 3,
  kExitSchema = 4,
  kExitEmpty = 5,
};

int exit_code_for(ErrorCode code);

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arflow
