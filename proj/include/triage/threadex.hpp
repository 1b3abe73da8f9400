#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/stats.hpp"

namespace triage {

/// A thread opened by a flagged post whose initiator posts again after at least one reply.
struct FlaggedThread {
  Thread thread;
  std::string target_user_id;
  std::size_t prediction_index = 0;  // last initiator-authored index
  double y_q = 0.0;                  // probabilistic label of the predicted post
  State y = State::flagged;
  PostPartition partition;
  std::vector<double> post_q;  // resolved q for every post of the thread

  std::size_t target_post_count() const;
};

/// Applies the flagged-initiator extraction rules; result is ordered by thread_id.
std::vector<FlaggedThread> extract_flagged(const Corpus& corpus, const LabelingConfig& cfg);

/// Rebuilds a corpus from the threads carried by extracted records.
Corpus corpus_of(const std::vector<FlaggedThread>& threads);

struct ThreadStats {
  CountSummary target_posts;
  CountSummary replies;       // posts after the opening post
  CountSummary participants;  // distinct non-initiator authors
  std::size_t thread_count = 0;
};

ThreadStats describe_threads(const std::vector<FlaggedThread>& threads);

struct EngagementRow {
  int n_target_posts = 0;
  int n_threads = 0;
  double green_fraction = 0.0;
};

struct EngagementResult {
  std::vector<EngagementRow> rows;  // ascending engagement level
  std::optional<PearsonResult> correlation;
};

/// Green rate of the final target state per number of target-user posts, and the
/// unweighted Pearson correlation across levels.
EngagementResult engagement_green_rate(const std::vector<FlaggedThread>& threads);

nlohmann::ordered_json stats_to_json(const ThreadStats& stats, const EngagementResult& engagement);
std::string engagement_csv(const EngagementResult& engagement);

}  // namespace triage
