#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toklab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one `toklab` invocation. `args` excludes the program name. Output
// goes to `out`, diagnostics to `err`; `in` backs `encode --stdin`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::istream& in);

}  // namespace toklab
