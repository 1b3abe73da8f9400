#include "triage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "triage/util.hpp"

namespace triage {

namespace {

// Consonant-vowel syllables; the consonant set keeps pseudo-words clear of every
// lexicon entry and prefix shipped in data/.
constexpr std::string_view kConsonants = "bdfgnpvz";
constexpr std::string_view kVowels = "aeiou";

const std::vector<std::string> kFunctionWords = {"the", "a",    "and",    "to",  "of",   "it",  "is", "that",
                                                 "so",  "just", "really", "but", "with", "for", "this"};
const std::vector<std::string> kFlaggedTargetWords = {"i",     "me",   "my",    "alone",   "hopeless", "scared",
                                                      "hurt",  "pain", "cry",   "sad",     "tired",    "empty",
                                                      "worried", "anxious", "panic", "worthless", "die"};
const std::vector<std::string> kGreenTargetWords = {"i",    "my",    "better",    "good",  "hope",   "calm",
                                                    "thanks", "happy", "glad", "therapist", "sleep", "relaxed"};
// Supportive replies mirror the target's distress vocabulary; neutral replies chat in
// the recovery register. The same words thus carry opposite outcome evidence depending
// on who writes them.
const std::vector<std::string> kSupportiveWords = {"you",   "your",     "alone", "scared", "hurt",  "pain",
                                                   "sad",   "hopeless", "tired", "worried", "help", "support"};
const std::vector<std::string> kNeutralWords = {"you",   "we",   "great", "good",    "happy",   "glad",
                                                "lol",   "game", "music", "weekend", "friends", "better"};

const std::vector<std::pair<std::string, double>> kBoards = {
    {"Tough Times", 0.6}, {"Getting Help", 0.25}, {"Hang out", 0.1}, {"Introduction", 0.05}};

struct TopicSampler {
  std::vector<std::vector<std::string>> words;
  std::vector<std::vector<double>> weights;
};

std::vector<double> zipf_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / static_cast<double>(r + 1);
  return w;
}

TopicSampler make_topics(int n_topics, int vocab_size) {
  TopicSampler s;
  for (int t = 0; t < n_topics; ++t) {
    s.words.push_back(planted_topic_words(t, n_topics, vocab_size));
    s.weights.push_back(zipf_weights(s.words.back().size()));
  }
  return s;
}

// Topic mixture for a post given who writes it and in which state.
std::vector<double> topic_mixture(PostRole role, State state, int n_topics) {
  std::vector<double> w(n_topics, 0.05);
  auto add = [&](int topic, double mass) { w[topic % n_topics] += mass; };
  switch (role) {
    case PostRole::target:
      add(state == State::flagged ? 0 : 1, 0.8);
      break;
    case PostRole::participant_supportive:
      add(0, 0.6);
      add(2, 0.2);
      break;
    case PostRole::participant_neutral:
      add(1, 0.6);
      add(2, 0.2);
      break;
  }
  return w;
}

const std::vector<std::string>& lexical_words(PostRole role, State state) {
  switch (role) {
    case PostRole::target: return state == State::flagged ? kFlaggedTargetWords : kGreenTargetWords;
    case PostRole::participant_supportive: return kSupportiveWords;
    case PostRole::participant_neutral: return kNeutralWords;
  }
  return kNeutralWords;
}

std::string make_body(Rng& rng, const TopicSampler& topics, PostRole role, State state) {
  const auto mixture = topic_mixture(role, state, static_cast<int>(topics.words.size()));
  const auto& lex = lexical_words(role, state);
  const int length = 18 + static_cast<int>(rng.below(15));
  std::string body;
  for (int i = 0; i < length; ++i) {
    const double u = rng.uniform();
    std::string word;
    if (u < 0.25) {
      word = kFunctionWords[rng.below(kFunctionWords.size())];
    } else if (u < 0.45) {
      word = lex[rng.below(lex.size())];
    } else {
      std::size_t t = rng.categorical(mixture);
      word = topics.words[t][rng.categorical(topics.weights[t])];
    }
    if (!body.empty()) body.push_back(' ');
    body += word;
  }
  body.push_back('.');
  return body;
}

// Truncated geometric: successive successes with probability p, at most `cap`.
int truncated_geometric(Rng& rng, double p, int cap) {
  int k = 0;
  while (k < cap && rng.bernoulli(p)) ++k;
  return k;
}

double emit_p_green(Rng& rng, State truth, double noise, double tau) {
  bool green = truth == State::green;
  if (rng.bernoulli(noise)) green = !green;
  const double u = rng.uniform();
  // Green side (tau, 1], flagged side [0, tau).
  return green ? tau + (1.0 - tau) * (1.0 - u) : tau * u;
}

}  // namespace

void SynthConfig::validate() const {
  auto bad = [](const std::string& field) { throw UsageError("invalid synth config field: " + field); };
  if (n_threads < 1) bad("n_threads");
  if (n_planted_topics < 1) bad("n_planted_topics");
  if (vocab_size < n_planted_topics) bad("vocab_size");
  if (!(base_green_transition > 0.0 && base_green_transition < 1.0)) bad("base_green_transition");
  if (!(supportive_boost >= 0.0)) bad("supportive_boost");
  if (base_green_transition + supportive_boost > 1.0) bad("supportive_boost");
  if (!(supportive_rate >= 0.0 && supportive_rate <= 1.0)) bad("supportive_rate");
  if (!(mean_replies > 0.0)) bad("mean_replies");
  if (!(label_noise >= 0.0 && label_noise <= 0.3)) bad("label_noise");
  if (!(length_decay > 0.0 && length_decay <= 1.0)) bad("length_decay");
  if (!(relapse >= 0.0 && relapse <= 1.0)) bad("relapse");
  if (!(tau > 0.0 && tau < 1.0)) bad("tau");
}

std::string_view to_string(PostRole r) {
  switch (r) {
    case PostRole::target: return "target";
    case PostRole::participant_supportive: return "participant-supportive";
    case PostRole::participant_neutral: return "participant-neutral";
  }
  return "?";
}

std::string pseudo_word(std::size_t index) {
  const std::size_t base = kConsonants.size() * kVowels.size();
  std::string w;
  for (int i = 0; i < 3; ++i) {
    std::size_t syl = index % base;
    index /= base;
    w.push_back(kConsonants[syl / kVowels.size()]);
    w.push_back(kVowels[syl % kVowels.size()]);
  }
  // Indices beyond base^3 get extra syllables.
  while (index > 0) {
    std::size_t syl = index % base;
    index /= base;
    w.push_back(kConsonants[syl / kVowels.size()]);
    w.push_back(kVowels[syl % kVowels.size()]);
  }
  return w;
}

std::vector<std::string> planted_topic_words(int topic, int n_topics, int vocab_size) {
  const int per = vocab_size / n_topics;
  std::vector<std::string> out;
  for (int r = 0; r < per; ++r) out.push_back(pseudo_word(static_cast<std::size_t>(topic * per + r)));
  return out;
}

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto topics = make_topics(cfg.n_planted_topics, cfg.vocab_size);
  const double reply_p = cfg.mean_replies / (1.0 + cfg.mean_replies);
  std::vector<double> board_weights;
  for (const auto& b : kBoards) board_weights.push_back(b.second);

  SynthCorpus out;
  constexpr std::int64_t kEpoch = 1451606400;  // 2016-01-01
  constexpr std::uint64_t kUsers = 600;
  constexpr std::uint64_t kModerators = 5;

  for (int t = 0; t < cfg.n_threads; ++t) {
    char tid[16];
    std::snprintf(tid, sizeof tid, "t%05d", t);
    const std::string thread_id = tid;
    const std::string target = "u" + std::to_string(rng.below(kUsers));
    const std::string& board = kBoards[rng.categorical(board_weights)].first;
    const int m = 2 + truncated_geometric(rng, kSynthExtraTargetProb, kSynthMaxExtraTargetPosts);
    const double attenuation = std::pow(cfg.length_decay, m - 2);

    std::int64_t clock = kEpoch + static_cast<std::int64_t>(t) * 3600;
    int post_index = 0;
    auto emit = [&](const std::string& author, bool moderator, PostRole role, State state) {
      char pid[32];
      std::snprintf(pid, sizeof pid, "%s-%03d", thread_id.c_str(), post_index++);
      Post p;
      p.post_id = pid;
      p.thread_id = thread_id;
      p.author_id = author;
      clock += 60 + static_cast<std::int64_t>(rng.below(3540));
      p.timestamp = clock;
      p.board = board;
      p.body = make_body(rng, topics, role, state);
      p.is_moderator = moderator;
      p.p_green = emit_p_green(rng, state, cfg.label_noise, cfg.tau);
      out.truth.push_back({p.post_id, role, state});
      out.posts.push_back(std::move(p));
    };

    State state = State::flagged;
    emit(target, false, PostRole::target, state);
    for (int j = 1; j < m; ++j) {
      int replies = truncated_geometric(rng, reply_p, kSynthMaxReplies);
      if (j == 1) ++replies;  // the first gap always has a reply
      int supportive = 0;
      for (int r = 0; r < replies; ++r) {
        const bool is_supportive = rng.bernoulli(cfg.supportive_rate);
        supportive += is_supportive;
        const bool moderator = is_supportive && rng.bernoulli(0.25);
        std::string author;
        if (moderator) {
          author = "mod" + std::to_string(rng.below(kModerators));
        } else {
          do {
            author = "u" + std::to_string(rng.below(kUsers));
          } while (author == target);
        }
        State pstate = State::green;
        if (!is_supportive && rng.bernoulli(0.15)) pstate = State::flagged;
        emit(author, moderator,
             is_supportive ? PostRole::participant_supportive : PostRole::participant_neutral, pstate);
      }
      const double frac = replies > 0 ? static_cast<double>(supportive) / replies : 0.0;
      const double p = std::clamp((cfg.base_green_transition + cfg.supportive_boost * frac) * attenuation, 0.0, 1.0);
      if (state == State::flagged) {
        state = rng.bernoulli(p) ? State::green : State::flagged;
      } else {
        state = rng.bernoulli(cfg.relapse * (1.0 - p)) ? State::flagged : State::green;
      }
      emit(target, false, PostRole::target, state);
    }
    out.threads.push_back({thread_id, state, m});
  }
  return out;
}

std::string SynthCorpus::posts_jsonl() const {
  std::ostringstream ss;
  for (const auto& p : posts) ss << post_to_json(p).dump() << '\n';
  return ss.str();
}

std::string SynthCorpus::ground_truth_csv() const {
  std::ostringstream ss;
  ss << "post_id,role,state\n";
  for (const auto& t : truth) ss << t.post_id << ',' << to_string(t.role) << ',' << to_string(t.state) << '\n';
  return ss.str();
}

std::string SynthCorpus::thread_truth_csv() const {
  std::ostringstream ss;
  ss << "thread_id,final_state\n";
  for (const auto& t : threads) ss << t.thread_id << ',' << to_string(t.final_state) << '\n';
  return ss.str();
}

PlantedTopicDocs generate_topic_documents(int n_docs, int n_topics, int words_per_topic, int doc_length,
                                          std::uint64_t seed, std::size_t top_n) {
  if (n_docs < 1 || n_topics < 1 || words_per_topic < 1 || doc_length < 1)
    throw UsageError("generate_topic_documents: sizes must be positive");
  Rng rng(seed);
  const auto topics = make_topics(n_topics, n_topics * words_per_topic);
  PlantedTopicDocs out;
  for (int t = 0; t < n_topics; ++t) {
    const auto& w = topics.words[t];
    out.top_terms.emplace_back(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(std::min(top_n, w.size())));
  }
  for (int d = 0; d < n_docs; ++d) {
    std::vector<double> mix(n_topics, 0.2 / n_topics);
    mix[rng.below(n_topics)] += 0.8;
    std::vector<std::string> doc;
    for (int i = 0; i < doc_length; ++i) {
      std::size_t t = rng.categorical(mix);
      doc.push_back(topics.words[t][rng.categorical(topics.weights[t])]);
    }
    out.docs.push_back(std::move(doc));
  }
  return out;
}

}  // namespace triage
