#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the `dlab` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitUnstable = 3,
};

/// Entry point behind the `dlab` executable. `args` excludes the program
/// name. Reports go to the files named by --out; messages go to out/err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dlab
