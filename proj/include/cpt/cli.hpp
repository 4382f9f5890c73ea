#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpt::cli {

/// Exit codes: 0 success, 1 computation or input error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err` as "error [code]: message".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpt::cli
