#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace vesselforge {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

// Shell-style word splitting for cmd:"..." backend specs: whitespace
// separates words; single quotes, double quotes and backslash escapes work
// as in POSIX sh (no expansion).
std::vector<std::string> split_command(const std::string& command);

}  // namespace vesselforge
