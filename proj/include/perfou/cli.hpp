#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace perfou {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStudyFail = 1;
inline constexpr int kExitConfigError = 2;

// args excludes the program name. Prints a one-line summary to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace perfou
