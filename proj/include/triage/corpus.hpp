#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace triage {

enum class State { flagged, green };

std::string_view to_string(State s);
State state_from_string(std::string_view s);

struct Post {
  std::string post_id;
  std::string thread_id;
  std::string author_id;
  std::int64_t timestamp = 0;
  std::string board;
  std::string body;
  bool is_moderator = false;
  std::optional<double> p_green;
  std::optional<State> manual_label;

  bool operator==(const Post&) const = default;
};

struct Thread {
  std::string thread_id;
  std::vector<Post> posts;  // ordered by (timestamp, post_id)
  std::string initiator_id;

  bool operator==(const Thread&) const = default;
};

/// Threads sorted by thread_id.
struct Corpus {
  std::vector<Thread> threads;

  std::size_t post_count() const;
  const Thread* find(std::string_view thread_id) const;
  bool operator==(const Corpus&) const = default;
};

struct LabelingConfig {
  double tau = 0.7751;
  bool prefer_manual = true;

  void validate() const;
};

struct ResolvedLabel {
  State label;
  double q;  // P(green)
};

/// Thrown when a post carries neither a probability nor a manual label.
class UnlabelableError : public std::runtime_error {
 public:
  explicit UnlabelableError(const std::string& post_id);
  const std::string& post_id() const { return post_id_; }

 private:
  std::string post_id_;
};

ResolvedLabel resolve_label(const Post& post, const LabelingConfig& cfg);

struct PostPartition {
  std::vector<Post> target_posts;
  std::vector<Post> participant_posts;
};

/// Splits posts[0, prediction_index) into initiator and other-author posts.
/// The post at prediction_index is the one being predicted and belongs to neither list.
PostPartition partition_window(const Thread& thread, std::size_t prediction_index);

struct LoadOptions {
  /// Reject unknown record fields instead of warning about them.
  bool strict = true;
};

Corpus load_corpus(std::istream& in, const LoadOptions& opts = {});
Corpus load_corpus_file(const std::filesystem::path& path, const LoadOptions& opts = {});

/// Groups posts into threads and sorts them; validates uniqueness of post ids.
Corpus build_corpus(std::vector<Post> posts);

nlohmann::ordered_json post_to_json(const Post& post);
void write_corpus(std::ostream& out, const Corpus& corpus);
std::string corpus_to_jsonl(const Corpus& corpus);

}  // namespace triage
