#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ngtrend::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

/// Entry point behind the `ngtrend` binary. `args` excludes the program
/// name. Tables go to `out`; diagnostics and the effective configuration go
/// to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ngtrend::cli
