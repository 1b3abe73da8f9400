#pragma once

#include <string>
#include <vector>

namespace triage {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. args excludes the program name, e.g. {"cv", "--config", "x.ini"}.
int run_command(const std::vector<std::string>& args);

}  // namespace triage
