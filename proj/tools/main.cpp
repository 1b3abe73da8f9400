#include <spdlog/cfg/env.h>

#include "triage/cli.hpp"

int main(int argc, char** argv) {
  // Log level comes from SPDLOG_LEVEL, e.g. SPDLOG_LEVEL=debug.
  spdlog::cfg::load_env_levels();
  return triage::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
