#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/matrix.hpp"
#include "triage/textproc.hpp"
#include "triage/threadex.hpp"
#include "triage/topics.hpp"

namespace triage {

struct TfidfVocab {
  std::vector<std::string> terms;
  std::vector<int> df;
  std::vector<double> idf;
  std::size_t n_docs = 0;
  int min_df = 5;
  std::set<std::string> stopwords;

  /// Index of a term or -1.
  int find(std::string_view term) const;
  void reindex();

 private:
  std::unordered_map<std::string, int> index_;
};

/// Document frequencies are counted per post; idf(w) = ln((N+1)/(df+1)) + 1.
TfidfVocab build_tfidf_vocab(const std::vector<std::vector<Token>>& docs, int min_df,
                             const std::set<std::string>& stopwords);

/// Sorted (index, value) pairs.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// l2-normalized raw-count tf-idf; zero vector when no token is in the vocabulary.
SparseVector tfidf_vector(std::span<const Token> tokens, const TfidfVocab& vocab);

/// Terms fed to the topic model: non-numeric tokens outside the stopword list.
std::vector<std::string> content_terms(std::span<const Token> tokens, const std::set<std::string>& stopwords);

std::set<std::string> load_stopwords(const std::filesystem::path& path);

struct FeatureResources {
  CategoryLexicon liwc;
  SentimentLexicon sentiment;
  LdaModel lda;
  TfidfVocab vocab;
  int lda_infer_sweeps = 200;
  std::uint64_t seed = 0;
};

struct FeatureBlock {
  std::vector<double> liwc;
  Sentiment sentiment;
  std::vector<double> lda;
  SparseVector tokens;
};

/// Features of one pseudo-document.
FeatureBlock featurize_text(std::string_view text, const FeatureResources& res);
/// Bodies are newline-joined in thread order and featurized as one document.
FeatureBlock featurize_partition(std::span<const Post> posts, const FeatureResources& res);

struct SharedFeatures {
  double first_reply_q = 0.0;
  int n_target_posts = 0;
  int n_participant_posts = 0;
  int n_moderator_posts = 0;
};

SharedFeatures shared_features(const FlaggedThread& thread);

enum class AssemblyStrategy { TargetOnly, Averaged, SeparateSymmetric };

std::string_view to_string(AssemblyStrategy s);
AssemblyStrategy strategy_from_string(std::string_view s);

struct GroupRange {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const GroupRange&) const = default;
};

/// Prefix of a group name before '_': liwc, sent, lda, tok, or shared.
std::string group_family(std::string_view group_name);

struct AssemblyOptions {
  /// Whether TargetOnly vectors still carry the thread-level shared group.
  bool target_only_includes_shared = true;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<GroupRange> group_map;
};

FeatureVector assemble_blocks(const FeatureBlock& target, const FeatureBlock& participants,
                              const SharedFeatures& shared, AssemblyStrategy strategy,
                              const FeatureResources& res, const AssemblyOptions& opts = {});

FeatureVector assemble(const FlaggedThread& thread, AssemblyStrategy strategy, const FeatureResources& res,
                       const AssemblyOptions& opts = {});

/// Feature names for every index of vectors assembled under `strategy`.
std::vector<std::string> feature_names(AssemblyStrategy strategy, const FeatureResources& res,
                                       const AssemblyOptions& opts = {});

struct Dataset {
  std::string strategy;
  std::vector<GroupRange> group_map;
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<int> y;     // +1 green, -1 flagged
  std::vector<double> q;  // probabilistic final label
  std::vector<std::string> ids;
  std::map<std::string, std::string> fingerprints;

  std::size_t size() const { return y.size(); }
};

struct ThreadBlocks {
  FeatureBlock target;
  FeatureBlock participants;
  SharedFeatures shared;
};

std::vector<ThreadBlocks> compute_blocks(const std::vector<FlaggedThread>& threads, const FeatureResources& res);

Dataset dataset_from_blocks(const std::vector<ThreadBlocks>& blocks, const std::vector<FlaggedThread>& threads,
                            AssemblyStrategy strategy, const FeatureResources& res,
                            const AssemblyOptions& opts = {});

/// Keeps only groups whose family is listed; the shared group is always kept.
Dataset select_groups(const Dataset& data, const std::set<std::string>& families);

/// Writes features.json (header), features.csv (labels + dense columns) and
/// features.coo (row,col,value for token columns).
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& dir);

nlohmann::ordered_json vocab_to_json(const TfidfVocab& vocab);
TfidfVocab vocab_from_json(const nlohmann::json& j);

}  // namespace triage
