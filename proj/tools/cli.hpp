#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitExplosion = 2;

inline constexpr const char* kEngineVersion = "0.1.0";

/// Entry point shared by the dfprune binary and the tests. `args` excludes
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dfprune::cli
