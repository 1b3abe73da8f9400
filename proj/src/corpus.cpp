#include "triage/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "triage/util.hpp"

namespace triage {

namespace {

constexpr std::array<std::string_view, 9> kFields = {
    "post_id", "thread_id", "author_id", "timestamp", "board",
    "body",    "is_moderator", "p_green", "manual_label"};

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

const nlohmann::json& require(const nlohmann::json& rec, std::string_view key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end())
    throw DataError(at_line(line) + "missing required field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const nlohmann::json& rec, std::string_view key, std::size_t line) {
  const auto& v = require(rec, key, line);
  if (!v.is_string())
    throw DataError(at_line(line) + "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

Post parse_record(const nlohmann::json& rec, std::size_t line, const LoadOptions& opts) {
  if (!rec.is_object()) throw DataError(at_line(line) + "record is not a JSON object");
  for (const auto& [key, _] : rec.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) != kFields.end()) continue;
    if (opts.strict) throw DataError(at_line(line) + "unknown field '" + key + "'");
    spdlog::warn("{}ignoring unknown field '{}'", at_line(line), key);
  }

  Post p;
  p.post_id = require_string(rec, "post_id", line);
  p.thread_id = require_string(rec, "thread_id", line);
  p.author_id = require_string(rec, "author_id", line);
  p.board = require_string(rec, "board", line);
  p.body = require_string(rec, "body", line);

  const auto& ts = require(rec, "timestamp", line);
  if (!ts.is_number_integer()) throw DataError(at_line(line) + "field 'timestamp' must be an integer");
  p.timestamp = ts.get<std::int64_t>();

  const auto& mod = require(rec, "is_moderator", line);
  if (!mod.is_boolean()) throw DataError(at_line(line) + "field 'is_moderator' must be a boolean");
  p.is_moderator = mod.get<bool>();

  // The two label fields are nullable; an absent key reads as null.
  if (auto it = rec.find("p_green"); it != rec.end() && !it->is_null()) {
    if (!it->is_number()) throw DataError(at_line(line) + "field 'p_green' must be a number or null");
    double q = it->get<double>();
    if (!(q >= 0.0 && q <= 1.0))
      throw DataError(at_line(line) + "label out of range: p_green=" + format_double(q) +
                      " for post " + p.post_id);
    p.p_green = q;
  }
  if (auto it = rec.find("manual_label"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError(at_line(line) + "field 'manual_label' must be a string or null");
    try {
      p.manual_label = state_from_string(it->get<std::string>());
    } catch (const DataError& e) {
      throw DataError(at_line(line) + e.what());
    }
  }
  if (p.post_id.empty()) throw DataError(at_line(line) + "empty post_id");
  return p;
}

}  // namespace

std::string_view to_string(State s) { return s == State::green ? "green" : "flagged"; }

State state_from_string(std::string_view s) {
  if (s == "green") return State::green;
  if (s == "flagged") return State::flagged;
  throw DataError("unknown label '" + std::string(s) + "' (expected flagged or green)");
}

std::size_t Corpus::post_count() const {
  std::size_t n = 0;
  for (const auto& t : threads) n += t.posts.size();
  return n;
}

const Thread* Corpus::find(std::string_view thread_id) const {
  auto it = std::lower_bound(threads.begin(), threads.end(), thread_id,
                             [](const Thread& t, std::string_view id) { return t.thread_id < id; });
  if (it == threads.end() || it->thread_id != thread_id) return nullptr;
  return &*it;
}

void LabelingConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw UsageError("labeling.tau must lie in (0, 1)");
}

UnlabelableError::UnlabelableError(const std::string& post_id)
    : std::runtime_error("post " + post_id + " has neither p_green nor manual_label"),
      post_id_(post_id) {}

ResolvedLabel resolve_label(const Post& post, const LabelingConfig& cfg) {
  if (cfg.prefer_manual && post.manual_label) {
    return {*post.manual_label, *post.manual_label == State::green ? 1.0 : 0.0};
  }
  if (post.p_green) {
    double q = *post.p_green;
    return {q > cfg.tau ? State::green : State::flagged, q};
  }
  if (post.manual_label) {
    return {*post.manual_label, *post.manual_label == State::green ? 1.0 : 0.0};
  }
  throw UnlabelableError(post.post_id);
}

PostPartition partition_window(const Thread& thread, std::size_t prediction_index) {
  if (prediction_index == 0 || prediction_index >= thread.posts.size())
    throw std::out_of_range("prediction index " + std::to_string(prediction_index) +
                            " out of range for thread " + thread.thread_id + " with " +
                            std::to_string(thread.posts.size()) + " posts");
  if (thread.posts[prediction_index].author_id != thread.initiator_id)
    throw std::invalid_argument("post at prediction index " + std::to_string(prediction_index) +
                                " of thread " + thread.thread_id + " is not by the initiator");
  PostPartition part;
  for (std::size_t i = 0; i < prediction_index; ++i) {
    const Post& p = thread.posts[i];
    (p.author_id == thread.initiator_id ? part.target_posts : part.participant_posts).push_back(p);
  }
  return part;
}

Corpus build_corpus(std::vector<Post> posts) {
  std::unordered_set<std::string> seen;
  std::map<std::string, std::vector<Post>> grouped;
  for (auto& p : posts) {
    if (!seen.insert(p.post_id).second) throw DataError("duplicate post_id '" + p.post_id + "'");
    grouped[p.thread_id].push_back(std::move(p));
  }
  Corpus corpus;
  corpus.threads.reserve(grouped.size());
  for (auto& [id, ps] : grouped) {
    std::sort(ps.begin(), ps.end(), [](const Post& a, const Post& b) {
      return std::tie(a.timestamp, a.post_id) < std::tie(b.timestamp, b.post_id);
    });
    Thread t;
    t.thread_id = id;
    t.initiator_id = ps.front().author_id;
    t.posts = std::move(ps);
    corpus.threads.push_back(std::move(t));
  }
  return corpus;
}

Corpus load_corpus(std::istream& in, const LoadOptions& opts) {
  std::vector<Post> posts;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(at_line(lineno) + "malformed record: " + e.what());
    }
    Post p = parse_record(rec, lineno, opts);
    if (!seen.insert(p.post_id).second)
      throw DataError(at_line(lineno) + "duplicate post_id '" + p.post_id + "'");
    posts.push_back(std::move(p));
  }
  Corpus corpus = build_corpus(std::move(posts));
  spdlog::debug("loaded {} posts in {} threads", corpus.post_count(), corpus.threads.size());
  return corpus;
}

Corpus load_corpus_file(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return load_corpus(in, opts);
}

nlohmann::ordered_json post_to_json(const Post& p) {
  nlohmann::ordered_json out;
  out["post_id"] = p.post_id;
  out["thread_id"] = p.thread_id;
  out["author_id"] = p.author_id;
  out["timestamp"] = p.timestamp;
  out["board"] = p.board;
  out["body"] = p.body;
  out["is_moderator"] = p.is_moderator;
  if (p.p_green)
    out["p_green"] = *p.p_green;
  else
    out["p_green"] = nullptr;
  if (p.manual_label)
    out["manual_label"] = std::string(to_string(*p.manual_label));
  else
    out["manual_label"] = nullptr;
  return out;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus.threads)
    for (const auto& p : t.posts) out << post_to_json(p).dump() << '\n';
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::ostringstream ss;
  write_corpus(ss, corpus);
  return ss.str();
}

}  // namespace triage
