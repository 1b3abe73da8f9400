#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace triage {

struct LdaConfig {
  int topics = 10;
  std::optional<double> alpha;  // defaults to 50 / topics
  double beta = 0.01;
  int sweeps = 1000;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha.value_or(50.0 / topics); }
};

/// Counts visible to a sweep observer after each full Gibbs sweep.
struct SweepSnapshot {
  int sweep = 0;
  std::size_t topics = 0;
  std::span<const int> doc_topic;     // docs x topics, row-major
  std::span<const int> topic_totals;  // per topic
  std::span<const std::size_t> doc_lengths;
  /// Mean per-token log-likelihood under the current point estimates of theta and phi.
  double log_likelihood = 0.0;
};

using SweepObserver = std::function<void(const SweepSnapshot&)>;

class LdaModel {
 public:
  LdaModel(std::vector<std::string> vocab, std::vector<std::int64_t> topic_word_counts, int topics,
           double alpha, double beta, std::uint64_t seed, int sweeps);

  int topics() const { return topics_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }
  int sweeps() const { return sweeps_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  /// Vocabulary index or -1.
  int term_index(const std::string& term) const;

  std::int64_t count(int topic, std::size_t term) const { return counts_[topic * vocab_.size() + term]; }
  std::int64_t topic_total(int topic) const { return totals_[topic]; }
  double phi(int topic, std::size_t term) const { return phi_[topic * vocab_.size() + term]; }
  /// Marginal term probability p(w).
  double term_marginal(std::size_t term) const { return marginal_[term]; }

  nlohmann::ordered_json to_json() const;
  static LdaModel from_json(const nlohmann::json& j);

  bool operator==(const LdaModel& o) const {
    return topics_ == o.topics_ && alpha_ == o.alpha_ && beta_ == o.beta_ && seed_ == o.seed_ &&
           sweeps_ == o.sweeps_ && vocab_ == o.vocab_ && counts_ == o.counts_;
  }

 private:
  int topics_;
  double alpha_;
  double beta_;
  std::uint64_t seed_;
  int sweeps_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> totals_;
  std::vector<double> phi_;
  std::vector<double> marginal_;
};

/// Normalized collapsed-Gibbs conditional P(z = k | rest) for one token whose own
/// assignment has already been removed from the counts.
std::vector<double> gibbs_conditional(std::span<const int> doc_topic_row,
                                      std::span<const int> topic_word_column,
                                      std::span<const int> topic_totals, std::size_t vocab_size,
                                      double alpha, double beta);

/// Fits LDA by collapsed Gibbs sampling. The vocabulary is the sorted set of terms in `docs`.
LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg,
                 const SweepObserver& observer = {});

/// Fold-in topic mixture for a new document with the model's topic-word counts frozen.
std::vector<double> infer_theta(const LdaModel& model, std::span<const std::string> doc, int sweeps,
                                std::uint64_t seed);

struct RelevantTerm {
  std::string term;
  double relevance;
};

/// lambda*log(phi) + (1-lambda)*log(phi/marginal), natural logarithms.
double term_relevance(double phi, double marginal, double lambda);

/// Per topic, terms ranked by lambda*log(phi) + (1-lambda)*log(phi/p(w)).
std::vector<std::vector<RelevantTerm>> relevance_terms(const LdaModel& model, double lambda,
                                                       std::size_t top_n);

}  // namespace triage
