#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/evalx.hpp"
#include "triage/features.hpp"
#include "triage/learn.hpp"
#include "triage/synth.hpp"
#include "triage/threadex.hpp"
#include "triage/topics.hpp"

namespace triage {

struct PipelineConfig {
  std::uint64_t seed = 42;
  bool strict = false;

  std::filesystem::path out_dir = "out";
  std::filesystem::path corpus;  // empty: <out>/posts.jsonl
  std::filesystem::path dic;
  std::filesystem::path sentiment;
  std::filesystem::path stopwords;  // optional

  LabelingConfig labeling;

  int lda_topics = 10;
  std::optional<double> lda_alpha;
  double lda_beta = 0.01;
  int lda_sweeps = 1000;
  int lda_infer_sweeps = 200;
  std::vector<std::string> exclude_boards = {"Hang out", "Introduction"};
  double relevance_lambda = 0.6;
  std::size_t relevance_top_n = 10;

  int min_df = 5;
  AssemblyStrategy strategy = AssemblyStrategy::SeparateSymmetric;
  AssemblyOptions assembly;

  ModelKind model = ModelKind::logreg;
  double logreg_lambda = 1.0;
  double svm_lambda = 0.01;
  int max_iter = 500;
  int epochs = 50;
  int folds = 5;
  int repeats = 3;
  std::size_t top_k = 5;

  SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;  // defaults to `seed`

  SynthConfig synth_config() const;

  std::filesystem::path corpus_path() const { return corpus.empty() ? out_dir / "posts.jsonl" : corpus; }

  // Stage seeds, all derived from `seed`.
  std::uint64_t lda_seed() const;
  std::uint64_t feature_seed() const;
  std::uint64_t cv_seed() const;

  ModelSpec model_spec(ModelKind kind) const;
  CvConfig cv_config() const;
};

/// Reads an INI file; relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

/// Stage entry points. Each reads its inputs from the configured paths / output
/// directory and writes its outputs there.
void run_synth(const PipelineConfig& cfg);
nlohmann::ordered_json run_ingest(const PipelineConfig& cfg);
nlohmann::ordered_json run_extract(const PipelineConfig& cfg);
nlohmann::ordered_json run_lda_fit(const PipelineConfig& cfg);
nlohmann::ordered_json run_featurize(const PipelineConfig& cfg);
nlohmann::ordered_json run_cv(const PipelineConfig& cfg);
nlohmann::ordered_json run_ablate(const PipelineConfig& cfg);
nlohmann::ordered_json run_strategies(const PipelineConfig& cfg);
nlohmann::ordered_json run_proc(const PipelineConfig& cfg);
nlohmann::ordered_json run_report(const PipelineConfig& cfg);

/// LDA training documents: content terms of every post outside the excluded boards.
std::vector<std::vector<std::string>> lda_documents(const Corpus& corpus, const std::vector<std::string>& exclude_boards,
                                                    const std::set<std::string>& stopwords);

/// Loads lexicons, the fitted LDA model and the tf-idf vocabulary from a completed run.
FeatureResources load_resources(const PipelineConfig& cfg);

/// Default ablation subsets: liwc; +sent; +lda; +tok.
std::vector<std::set<std::string>> default_ablation_subsets();

}  // namespace triage
