#include "triage/cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "triage/pipeline.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

using Stage = std::function<void(const PipelineConfig&)>;

const std::vector<std::pair<std::string, Stage>>& stages() {
  static const std::vector<std::pair<std::string, Stage>> table = {
      {"synth", [](const PipelineConfig& c) { run_synth(c); }},
      {"ingest", [](const PipelineConfig& c) { run_ingest(c); }},
      {"extract", [](const PipelineConfig& c) { run_extract(c); }},
      {"lda-fit", [](const PipelineConfig& c) { run_lda_fit(c); }},
      {"featurize", [](const PipelineConfig& c) { run_featurize(c); }},
      {"cv", [](const PipelineConfig& c) { run_cv(c); }},
      {"ablate", [](const PipelineConfig& c) { run_ablate(c); }},
      {"strategies", [](const PipelineConfig& c) { run_strategies(c); }},
      {"proc", [](const PipelineConfig& c) { run_proc(c); }},
      {"report", [](const PipelineConfig& c) { run_report(c); }},
  };
  return table;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Flagged-thread outcome prediction pipeline", "triage"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool strict = false;

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, _] : stages()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "pipeline config (INI)")->required();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--out", out_dir, "override run.out");
    sub->add_flag("--strict", strict, "reject unknown corpus fields");
    subs[name] = sub;
  }

  // CLI11 wants argv-style input in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "triage: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    PipelineConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = std::filesystem::absolute(out_dir);
    if (strict) cfg.strict = true;
    for (const auto& [name, stage] : stages()) {
      if (subs[name]->parsed()) {
        stage(cfg);
        return kExitOk;
      }
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "triage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "triage: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace triage
