#pragma once

#include <map>
#include <string>
#include <vector>

namespace vattr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Flat "key=value" file; '#' starts a comment, blank lines are ignored.
// Keys are flag names without the leading dashes.
std::map<std::string, std::string> parse_run_config(const std::string& text);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace vattr
