#include "triage/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "triage/util.hpp"

namespace triage {

namespace {

constexpr int kModelVersion = 1;

std::vector<double> sample_weights(std::span<const int> ndk, std::span<const int> nkw_col,
                                   std::span<const int> nk, double alpha, double beta, double vbeta) {
  std::vector<double> w(ndk.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = (ndk[k] + alpha) * (nkw_col[k] + beta) / (nk[k] + vbeta);
  return w;
}

// Linear-scan draw from unnormalized weights; keeps the hot loop allocation-free.
std::size_t draw(Rng& rng, const double* w, std::size_t n) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += w[k];
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < n; ++k) {
    u -= w[k];
    if (u < 0.0) return k;
  }
  return n - 1;
}

}  // namespace

LdaModel::LdaModel(std::vector<std::string> vocab, std::vector<std::int64_t> topic_word_counts, int topics,
                   double alpha, double beta, std::uint64_t seed, int sweeps)
    : topics_(topics),
      alpha_(alpha),
      beta_(beta),
      seed_(seed),
      sweeps_(sweeps),
      vocab_(std::move(vocab)),
      counts_(std::move(topic_word_counts)) {
  if (topics_ < 2) throw DataError("LDA needs at least 2 topics");
  if (vocab_.empty()) throw DataError("LDA vocabulary is empty");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw DataError("LDA alpha and beta must be positive");
  const std::size_t V = vocab_.size();
  if (counts_.size() != static_cast<std::size_t>(topics_) * V)
    throw DataError("topic_word_counts has wrong shape");
  for (std::size_t v = 0; v < V; ++v) {
    if (!index_.emplace(vocab_[v], static_cast<int>(v)).second)
      throw DataError("duplicate vocabulary term '" + vocab_[v] + "'");
  }
  totals_.assign(topics_, 0);
  std::vector<double> term_totals(V, 0.0);
  for (int k = 0; k < topics_; ++k)
    for (std::size_t v = 0; v < V; ++v) {
      auto c = counts_[k * V + v];
      if (c < 0) throw DataError("negative topic-word count");
      totals_[k] += c;
      term_totals[v] += static_cast<double>(c);
    }
  phi_.resize(counts_.size());
  const double vbeta = static_cast<double>(V) * beta_;
  for (int k = 0; k < topics_; ++k)
    for (std::size_t v = 0; v < V; ++v)
      phi_[k * V + v] = (static_cast<double>(counts_[k * V + v]) + beta_) / (static_cast<double>(totals_[k]) + vbeta);
  double grand = std::accumulate(term_totals.begin(), term_totals.end(), 0.0);
  marginal_.resize(V);
  for (std::size_t v = 0; v < V; ++v) marginal_[v] = (term_totals[v] + beta_) / (grand + vbeta);
}

int LdaModel::term_index(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : it->second;
}

nlohmann::ordered_json LdaModel::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kModelVersion;
  j["K"] = topics_;
  j["alpha"] = alpha_;
  j["beta"] = beta_;
  j["vocab"] = vocab_;
  std::vector<std::vector<std::int64_t>> rows(topics_);
  for (int k = 0; k < topics_; ++k)
    rows[k].assign(counts_.begin() + k * vocab_.size(), counts_.begin() + (k + 1) * vocab_.size());
  j["topic_word_counts"] = rows;
  j["seed"] = seed_;
  j["sweeps"] = sweeps_;
  return j;
}

LdaModel LdaModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kModelVersion)
      throw DataError("unsupported LDA model version " + j.at("version").dump());
    int K = j.at("K").get<int>();
    auto vocab = j.at("vocab").get<std::vector<std::string>>();
    auto rows = j.at("topic_word_counts").get<std::vector<std::vector<std::int64_t>>>();
    if (rows.size() != static_cast<std::size_t>(K)) throw DataError("topic_word_counts row count != K");
    std::vector<std::int64_t> flat;
    for (auto& r : rows) {
      if (r.size() != vocab.size()) throw DataError("topic_word_counts row length != vocabulary size");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return LdaModel(std::move(vocab), std::move(flat), K, j.at("alpha").get<double>(),
                    j.at("beta").get<double>(), j.at("seed").get<std::uint64_t>(), j.at("sweeps").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed LDA model: ") + e.what());
  }
}

std::vector<double> gibbs_conditional(std::span<const int> doc_topic_row, std::span<const int> topic_word_column,
                                      std::span<const int> topic_totals, std::size_t vocab_size, double alpha,
                                      double beta) {
  if (doc_topic_row.size() != topic_word_column.size() || doc_topic_row.size() != topic_totals.size())
    throw std::invalid_argument("gibbs_conditional: topic dimension mismatch");
  auto w = sample_weights(doc_topic_row, topic_word_column, topic_totals, alpha, beta,
                          static_cast<double>(vocab_size) * beta);
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg,
                 const SweepObserver& observer) {
  if (cfg.topics < 2) throw DataError("LDA needs at least 2 topics (K=" + std::to_string(cfg.topics) + ")");
  if (docs.empty()) throw DataError("LDA corpus has no documents");
  if (cfg.sweeps < 0) throw DataError("LDA sweeps must be nonnegative");
  const double alpha = cfg.resolved_alpha();
  const double beta = cfg.beta;
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DataError("LDA alpha and beta must be positive");

  std::set<std::string> terms;
  for (const auto& d : docs) terms.insert(d.begin(), d.end());
  if (terms.empty()) throw DataError("LDA vocabulary is empty");
  std::vector<std::string> vocab(terms.begin(), terms.end());
  std::unordered_map<std::string, int> index;
  for (std::size_t v = 0; v < vocab.size(); ++v) index[vocab[v]] = static_cast<int>(v);

  const std::size_t K = static_cast<std::size_t>(cfg.topics);
  const std::size_t V = vocab.size();
  const std::size_t D = docs.size();
  const double vbeta = static_cast<double>(V) * beta;

  std::vector<std::vector<int>> words(D), z(D);
  std::vector<std::size_t> lengths(D);
  std::vector<int> ndk(D * K, 0), nkw(K * V, 0), nk(K, 0);
  Rng rng(cfg.seed);
  for (std::size_t d = 0; d < D; ++d) {
    lengths[d] = docs[d].size();
    words[d].reserve(docs[d].size());
    z[d].reserve(docs[d].size());
    for (const auto& t : docs[d]) {
      int w = index.at(t);
      int k = static_cast<int>(rng.below(K));
      words[d].push_back(w);
      z[d].push_back(k);
      ++ndk[d * K + k];
      ++nkw[k * V + w];
      ++nk[k];
    }
  }

  auto log_likelihood = [&] {
    double ll = 0.0;
    std::size_t n = 0;
    for (std::size_t d = 0; d < D; ++d) {
      const double denom = static_cast<double>(lengths[d]) + K * alpha;
      for (int w : words[d]) {
        double p = 0.0;
        for (std::size_t k = 0; k < K; ++k)
          p += (ndk[d * K + k] + alpha) / denom * (nkw[k * V + w] + beta) / (nk[k] + vbeta);
        ll += std::log(p);
        ++n;
      }
    }
    return n ? ll / static_cast<double>(n) : 0.0;
  };
  auto notify = [&](int sweep) {
    if (!observer) return;
    SweepSnapshot s;
    s.sweep = sweep;
    s.topics = K;
    s.doc_topic = ndk;
    s.topic_totals = nk;
    s.doc_lengths = lengths;
    s.log_likelihood = log_likelihood();
    observer(s);
  };

  notify(0);
  std::vector<double> weights(K);
  for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      int* dt = &ndk[d * K];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const int w = words[d][i];
        int k = z[d][i];
        --dt[k];
        --nkw[k * V + w];
        --nk[k];
        for (std::size_t j = 0; j < K; ++j)
          weights[j] = (dt[j] + alpha) * (nkw[j * V + w] + beta) / (nk[j] + vbeta);
        k = static_cast<int>(draw(rng, weights.data(), K));
        z[d][i] = k;
        ++dt[k];
        ++nkw[k * V + w];
        ++nk[k];
      }
    }
    notify(sweep);
  }

  std::vector<std::int64_t> counts(nkw.begin(), nkw.end());
  return LdaModel(std::move(vocab), std::move(counts), cfg.topics, alpha, beta, cfg.seed, cfg.sweeps);
}

std::vector<double> infer_theta(const LdaModel& model, std::span<const std::string> doc, int sweeps,
                                std::uint64_t seed) {
  const std::size_t K = static_cast<std::size_t>(model.topics());
  const double alpha = model.alpha();
  std::vector<int> words;
  for (const auto& t : doc) {
    int w = model.term_index(t);
    if (w >= 0) words.push_back(w);
  }
  std::vector<double> theta(K, 1.0 / static_cast<double>(K));
  if (words.empty()) return theta;

  Rng rng(seed);
  std::vector<int> z(words.size()), ndk(K, 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = static_cast<int>(rng.below(K));
    ++ndk[z[i]];
  }
  const double denom = static_cast<double>(words.size()) + K * alpha;
  std::fill(theta.begin(), theta.end(), 0.0);
  auto accumulate_theta = [&] {
    for (std::size_t k = 0; k < K; ++k) theta[k] += (ndk[k] + alpha) / denom;
  };

  sweeps = std::max(sweeps, 1);
  const int burn_in = sweeps / 2;
  int samples = 0;
  std::vector<double> weights(K);
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int w = words[i];
      --ndk[z[i]];
      for (std::size_t k = 0; k < K; ++k) weights[k] = (ndk[k] + alpha) * model.phi(static_cast<int>(k), w);
      z[i] = static_cast<int>(draw(rng, weights.data(), K));
      ++ndk[z[i]];
    }
    if (s >= burn_in) {
      accumulate_theta();
      ++samples;
    }
  }
  double total = 0.0;
  for (double& t : theta) total += (t /= samples);
  for (double& t : theta) t /= total;
  return theta;
}

double term_relevance(double phi, double marginal, double lambda) {
  return lambda * std::log(phi) + (1.0 - lambda) * std::log(phi / marginal);
}

std::vector<std::vector<RelevantTerm>> relevance_terms(const LdaModel& model, double lambda, std::size_t top_n) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("relevance lambda must lie in [0, 1]");
  const std::size_t V = model.vocab_size();
  std::vector<std::vector<RelevantTerm>> out(model.topics());
  for (int k = 0; k < model.topics(); ++k) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(V);
    for (std::size_t v = 0; v < V; ++v) {
      double pw = model.term_marginal(v);
      if (!(pw > 0.0)) throw DataError("term '" + model.vocab()[v] + "' has zero marginal probability");
      double phi = model.phi(k, v);
      scored.emplace_back(term_relevance(phi, pw, lambda), v);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t n = std::min(top_n, V);
    for (std::size_t i = 0; i < n; ++i) out[k].push_back({model.vocab()[scored[i].second], scored[i].first});
  }
  return out;
}

}  // namespace triage
