#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one mastctl invocation. `args` includes the program name. Results go
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mast::cli
