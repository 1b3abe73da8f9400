#include "triage/threadex.hpp"

#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "triage/util.hpp"

namespace triage {

std::size_t FlaggedThread::target_post_count() const {
  std::size_t n = 0;
  for (const auto& p : thread.posts)
    if (p.author_id == target_user_id) ++n;
  return n;
}

std::vector<FlaggedThread> extract_flagged(const Corpus& corpus, const LabelingConfig& cfg) {
  cfg.validate();
  std::vector<FlaggedThread> out;
  for (const auto& thread : corpus.threads) {
    std::vector<ResolvedLabel> labels;
    labels.reserve(thread.posts.size());
    for (const auto& p : thread.posts) labels.push_back(resolve_label(p, cfg));

    if (labels.front().label != State::flagged) continue;

    std::size_t last_target = 0;
    std::size_t n_target = 0;
    for (std::size_t i = 0; i < thread.posts.size(); ++i) {
      if (thread.posts[i].author_id == thread.initiator_id) {
        ++n_target;
        last_target = i;
      }
    }
    if (n_target < 2) continue;

    bool reply_before_final = false;
    for (std::size_t i = 1; i < last_target; ++i)
      if (thread.posts[i].author_id != thread.initiator_id) reply_before_final = true;
    if (!reply_before_final) continue;

    FlaggedThread ft;
    ft.thread = thread;
    ft.target_user_id = thread.initiator_id;
    ft.prediction_index = last_target;
    ft.y = labels[last_target].label;
    ft.y_q = labels[last_target].q;
    ft.partition = partition_window(thread, last_target);
    ft.post_q.reserve(labels.size());
    for (const auto& l : labels) ft.post_q.push_back(l.q);
    out.push_back(std::move(ft));
  }
  // corpus.threads is sorted by id already, so `out` inherits that order.
  return out;
}

Corpus corpus_of(const std::vector<FlaggedThread>& threads) {
  Corpus c;
  for (const auto& ft : threads) c.threads.push_back(ft.thread);
  std::sort(c.threads.begin(), c.threads.end(),
            [](const Thread& a, const Thread& b) { return a.thread_id < b.thread_id; });
  return c;
}

ThreadStats describe_threads(const std::vector<FlaggedThread>& threads) {
  if (threads.empty()) throw std::invalid_argument("describe_threads: no threads");
  std::vector<int> targets, replies, participants;
  for (const auto& ft : threads) {
    std::set<std::string> others;
    for (const auto& p : ft.thread.posts)
      if (p.author_id != ft.target_user_id) others.insert(p.author_id);
    targets.push_back(static_cast<int>(ft.target_post_count()));
    replies.push_back(static_cast<int>(ft.thread.posts.size()) - 1);
    participants.push_back(static_cast<int>(others.size()));
  }
  ThreadStats s;
  s.target_posts = summarize_counts(targets);
  s.replies = summarize_counts(replies);
  s.participants = summarize_counts(participants);
  s.thread_count = threads.size();
  return s;
}

EngagementResult engagement_green_rate(const std::vector<FlaggedThread>& threads) {
  std::map<int, std::pair<int, int>> by_level;  // level -> (threads, green)
  for (const auto& ft : threads) {
    auto& [n, g] = by_level[static_cast<int>(ft.target_post_count())];
    ++n;
    if (ft.y == State::green) ++g;
  }
  EngagementResult r;
  std::vector<double> levels, rates;
  for (const auto& [level, ng] : by_level) {
    EngagementRow row{level, ng.first, static_cast<double>(ng.second) / ng.first};
    r.rows.push_back(row);
    levels.push_back(level);
    rates.push_back(row.green_fraction);
  }
  if (r.rows.size() < 3) {
    spdlog::warn("engagement_green_rate: only {} engagement levels, correlation omitted", r.rows.size());
  } else {
    r.correlation = pearson(levels, rates);
  }
  return r;
}

namespace {

nlohmann::ordered_json summary_json(const CountSummary& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["mode"] = s.mode;
  j["stdev"] = s.stdev;
  return j;
}

}  // namespace

nlohmann::ordered_json stats_to_json(const ThreadStats& stats, const EngagementResult& engagement) {
  nlohmann::ordered_json j;
  j["threads"] = stats.thread_count;
  j["target_posts"] = summary_json(stats.target_posts);
  j["replies"] = summary_json(stats.replies);
  j["participants"] = summary_json(stats.participants);
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [level, freq] : stats.target_posts.histogram) hist[std::to_string(level)] = freq;
  j["histogram"] = hist;
  if (engagement.correlation) {
    j["rho"] = engagement.correlation->rho;
    j["p"] = engagement.correlation->p;
  } else {
    j["rho"] = nullptr;
    j["p"] = nullptr;
  }
  return j;
}

std::string engagement_csv(const EngagementResult& engagement) {
  std::ostringstream ss;
  ss << "level,threads,green_fraction\n";
  for (const auto& r : engagement.rows)
    ss << r.n_target_posts << ',' << r.n_threads << ',' << format_double(r.green_fraction) << '\n';
  return ss.str();
}

}  // namespace triage
