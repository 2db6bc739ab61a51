#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sprobe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `sprobe` subcommand. args[0] is the program name.
/// Returns 0 on success, 1 on validation failure, 2 on usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sprobe::cli
