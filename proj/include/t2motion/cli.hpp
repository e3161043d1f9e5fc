#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace t2motion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `t2motion` tool. `args` excludes the program name.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

} // namespace t2motion::cli
