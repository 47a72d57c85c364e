#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace paragen::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUnexpected = 1;
inline constexpr int kInvalid = 2;
inline constexpr int kNumerical = 3;

// Runs the command line (args[0] is the program name). Normal output goes to
// `out`, diagnostics and the effective configuration to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace paragen::cli
