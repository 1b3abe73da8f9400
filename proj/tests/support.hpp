#pragma once
// Small builders shared by the unit tests.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/features.hpp"
#include "triage/synth.hpp"
#include "triage/threadex.hpp"
#include "triage/topics.hpp"

namespace triage::test {

inline Post make_post(std::string thread_id, int index, std::string author, std::optional<double> q,
                      std::string body = "text", bool moderator = false) {
  Post p;
  p.post_id = thread_id + "-" + std::to_string(index);
  p.thread_id = std::move(thread_id);
  p.author_id = std::move(author);
  p.timestamp = 1000 + index;
  p.board = "Tough Times";
  p.body = std::move(body);
  p.is_moderator = moderator;
  p.p_green = q;
  return p;
}

/// Thread from an author pattern such as "TPT" plus one q per post. 'T' is the initiator.
inline std::vector<Post> pattern_posts(const std::string& thread_id, const std::string& authors,
                                       const std::vector<double>& q) {
  std::vector<Post> out;
  int participant = 0;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    std::string who = authors[i] == 'T' ? "target" : "p" + std::to_string(participant++);
    out.push_back(make_post(thread_id, static_cast<int>(i), who, q.at(i)));
  }
  return out;
}

/// An extracted thread with `n_target` initiator posts alternating with single replies,
/// ending in the given final state.
inline FlaggedThread engagement_thread(const std::string& id, int n_target, bool green_final) {
  std::string authors = "T";
  std::vector<double> q = {0.1};
  for (int i = 1; i < n_target; ++i) {
    authors += "PT";
    q.push_back(0.9);
    q.push_back(i + 1 == n_target && green_final ? 0.95 : 0.1);
  }
  auto corpus = build_corpus(pattern_posts(id, authors, q));
  auto out = extract_flagged(corpus, {});
  return out.at(0);
}

inline CategoryLexicon small_lexicon() {
  std::istringstream in(
      "%\n1\tfamily\n2\tswear\n%\nmother*\t1\ndamn\t2\nfamily\t1\n");
  return load_dic(in);
}

inline std::string data_path(const std::string& name) { return std::string(TRIAGE_DATA_DIR) + "/" + name; }

/// Lexicons from data/, plus an LDA model and tf-idf vocabulary fitted on a small
/// synthetic corpus. Returns the extracted threads of that corpus alongside.
struct ToyWorld {
  std::vector<FlaggedThread> threads;
  FeatureResources res;
};

inline ToyWorld toy_world(int n_threads = 80, std::uint64_t seed = 7, int topics = 3) {
  SynthConfig sc;
  sc.n_threads = n_threads;
  sc.seed = seed;
  auto corpus = build_corpus(generate_corpus(sc).posts);
  std::vector<std::vector<Token>> docs;
  std::vector<std::vector<std::string>> lda_docs;
  for (const auto& t : corpus.threads)
    for (const auto& p : t.posts) {
      docs.push_back(tokenize(p.body));
      lda_docs.push_back(content_terms(docs.back(), {}));
    }
  LdaConfig lc;
  lc.topics = topics;
  lc.sweeps = 20;
  lc.seed = seed;
  FeatureResources res{load_dic_file(data_path("standin.dic")), load_sentiment_file(data_path("sentiment.csv")),
                       fit_lda(lda_docs, lc), build_tfidf_vocab(docs, 5, {}), 10, seed};
  return {extract_flagged(corpus, {}), std::move(res)};
}

}  // namespace triage::test
