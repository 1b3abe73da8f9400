#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

struct SynthConfig {
  int n_threads = 1000;
  int vocab_size = 300;
  int n_planted_topics = 3;
  double base_green_transition = 0.15;
  double supportive_boost = 0.8;
  double supportive_rate = 0.6;
  double mean_replies = 2.0;
  double label_noise = 0.05;
  /// Per extra target post, transition probabilities are multiplied by this factor.
  double length_decay = 0.7;
  /// A green target relapses with probability relapse * (1 - p_green_step).
  double relapse = 0.5;
  std::uint64_t seed = 42;
  double tau = 0.7751;

  void validate() const;
};

/// Caps on the truncated-geometric draws of the generator.
inline constexpr int kSynthMaxExtraTargetPosts = 4;
inline constexpr double kSynthExtraTargetProb = 0.45;
inline constexpr int kSynthMaxReplies = 8;

enum class PostRole { target, participant_supportive, participant_neutral };

std::string_view to_string(PostRole r);

struct PostTruth {
  std::string post_id;
  PostRole role;
  State state;
};

struct ThreadTruth {
  std::string thread_id;
  State final_state;
  int target_posts;
};

struct SynthCorpus {
  std::vector<Post> posts;  // thread order, then post order
  std::vector<PostTruth> truth;
  std::vector<ThreadTruth> threads;

  std::string posts_jsonl() const;
  std::string ground_truth_csv() const;
  std::string thread_truth_csv() const;
};

SynthCorpus generate_corpus(const SynthConfig& cfg);

/// Deterministic pseudo-word for an index; never collides with the bundled lexicons.
std::string pseudo_word(std::size_t index);

/// Words of planted topic t (disjoint across topics), most probable first.
std::vector<std::string> planted_topic_words(int topic, int n_topics, int vocab_size);

struct PlantedTopicDocs {
  std::vector<std::vector<std::string>> docs;
  /// Top-n planted terms per topic by generating probability.
  std::vector<std::vector<std::string>> top_terms;
};

/// Documents mixing disjoint-support planted topics, for topic-recovery checks.
PlantedTopicDocs generate_topic_documents(int n_docs, int n_topics, int words_per_topic, int doc_length,
                                          std::uint64_t seed, std::size_t top_n = 10);

}  // namespace triage
