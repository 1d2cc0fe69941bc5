#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ordibound {

// Exit codes: 0 success, 1 usage, 2 data, 3 numerical or estimation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Runs one subcommand. `args` excludes the program name. Reports go to
// `out`; errors go to `err` as a single JSON object.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ordibound
