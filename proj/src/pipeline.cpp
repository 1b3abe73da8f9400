#include "triage/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <spdlog/spdlog.h>

#include "triage/util.hpp"

namespace triage {

namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

enum Stream : std::uint64_t { kLdaStream = 2, kFeatureStream = 3, kCvStream = 4 };

const std::map<std::string, std::set<std::string>> kConfigKeys = {
    {"run", {"seed", "out", "strict"}},
    {"paths", {"corpus", "dic", "sentiment", "stopwords"}},
    {"labeling", {"tau", "prefer_manual"}},
    {"lda", {"topics", "alpha", "beta", "sweeps", "infer_sweeps", "exclude_boards", "relevance_lambda", "top_terms"}},
    {"features", {"min_df", "strategy", "target_only_includes_shared"}},
    {"learn",
     {"model", "lambda", "svm_lambda", "max_iter", "epochs", "folds", "repeats", "top_k"}},
    {"synth",
     {"n_threads", "vocab_size", "n_planted_topics", "base_green_transition", "supportive_boost", "supportive_rate",
      "mean_replies", "label_noise", "length_decay", "relapse", "seed"}},
};

template <typename T>
T get_value(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      std::string s = trim(*v);
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      throw std::invalid_argument(s);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return trim(*v);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      double d = std::stod(*v, &used);
      if (trim(v->substr(used)) != "") throw std::invalid_argument(*v);
      return static_cast<T>(d);
    } else {
      std::size_t used = 0;
      long long d = std::stoll(*v, &used);
      if (trim(v->substr(used)) != "") throw std::invalid_argument(*v);
      if (std::is_unsigned_v<T> && d < 0) throw std::invalid_argument(*v);
      return static_cast<T>(d);
    }
  } catch (const std::logic_error&) {
    throw UsageError("config key " + key + ": invalid value '" + *v + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, const ojson& j) { write_file_atomic(path, j.dump(2) + "\n"); }

template <typename Json = nlohmann::json>
Json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("missing input " + path.string() + " (run the producing stage first)");
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

ojson read_ojson(const fs::path& path) { return read_json<ojson>(path); }

Corpus load_run_corpus(const PipelineConfig& cfg) {
  return load_corpus_file(cfg.corpus_path(), LoadOptions{cfg.strict});
}

std::vector<FlaggedThread> extract_nonempty(const PipelineConfig& cfg, const Corpus& corpus) {
  auto threads = extract_flagged(corpus, cfg.labeling);
  if (threads.empty()) throw DataError("no flagged threads satisfy the extraction rules");
  return threads;
}

std::set<std::string> run_stopwords(const PipelineConfig& cfg) {
  return cfg.stopwords.empty() ? std::set<std::string>{} : load_stopwords(cfg.stopwords);
}

std::map<std::string, std::string> current_fingerprints(const PipelineConfig& cfg) {
  std::map<std::string, std::string> fp;
  fp["corpus"] = file_fingerprint(cfg.corpus_path());
  fp["dic"] = file_fingerprint(cfg.dic);
  fp["sentiment"] = file_fingerprint(cfg.sentiment);
  fp["lda_model"] = file_fingerprint(cfg.out_dir / "lda_model.json");
  fp["vocab"] = file_fingerprint(cfg.out_dir / "vocab.json");
  return fp;
}

Dataset load_features(const PipelineConfig& cfg) {
  Dataset d = read_dataset(cfg.out_dir / "features");
  auto current = current_fingerprints(cfg);
  for (const auto& [name, value] : current) {
    auto it = d.fingerprints.find(name);
    if (it == d.fingerprints.end() || it->second != value)
      throw DataError("feature matrix is stale: " + name + " changed since featurize ran");
  }
  return d;
}

ojson result_row_json(const ResultRow& r) {
  ojson j;
  j["features"] = r.label;
  j["dims"] = r.dims;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["fold_f1"] = r.fold_f1;
  return j;
}

ojson cv_json(const CvResult& cv, const Dataset& d, ModelKind kind) {
  ojson j;
  j["model"] = std::string(to_string(kind));
  j["seed"] = cv.seed;
  j["strategy"] = d.strategy;
  auto folds = ojson::array();
  for (const auto& f : cv.folds) folds.push_back(metrics_to_json(f));
  j["folds"] = folds;
  j["mean"] = {{"precision", cv.mean_macro_precision()},
               {"recall", cv.mean_macro_recall()},
               {"f1", cv.mean_macro_f1()}};
  j["pooled"] = metrics_to_json(cv.pooled);
  auto oof = ojson::array();
  for (std::size_t i = 0; i < d.size(); ++i)
    oof.push_back({{"thread_id", d.ids[i]},
                   {"fold", cv.fold_of[i]},
                   {"score", cv.oof_scores[i]},
                   {"prediction", std::string(to_string(cv.oof_predictions[i]))},
                   {"y", d.y[i] == 1 ? "green" : "flagged"},
                   {"y_q", d.q[i]}});
  j["oof"] = oof;
  return j;
}

struct StoredCv {
  CvResult cv;
  std::vector<std::string> ids;
  std::vector<double> q;
};

StoredCv cv_from_json(const ojson& j) {
  StoredCv s;
  try {
    s.cv.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("oof")) {
      s.ids.push_back(row.at("thread_id").get<std::string>());
      s.cv.fold_of.push_back(row.at("fold").get<int>());
      s.cv.oof_scores.push_back(row.at("score").get<double>());
      s.cv.oof_predictions.push_back(state_from_string(row.at("prediction").get<std::string>()));
      s.q.push_back(row.at("y_q").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed cv.json: ") + e.what());
  }
  return s;
}

ojson diagnostics_json(const ThreadDiagnostics& d) {
  auto corr = [](const std::optional<PearsonResult>& r) -> ojson {
    if (!r) return nullptr;
    return {{"rho", r->rho}, {"p", r->p}, {"degenerate", r->degenerate}};
  };
  ojson j;
  j["rho_green"] = corr(d.rho_green);
  j["rho_flagged"] = corr(d.rho_flagged);
  j["volatility_mean"] = d.volatility_mean;
  j["volatility_median"] = d.volatility_median;
  return j;
}

ojson strategy_json(const StrategyReport& r) {
  ojson j;
  auto rows = ojson::array();
  for (const auto& row : r.rows) rows.push_back(result_row_json(row));
  j["rows"] = rows;
  auto comps = ojson::array();
  for (const auto& c : r.comparisons)
    comps.push_back({{"a", c.a}, {"b", c.b}, {"t", c.test.degenerate ? 0.0 : c.test.t}, {"p", c.test.p},
                     {"p_bonferroni", c.test.p_bonferroni}, {"degenerate", c.test.degenerate}});
  j["comparisons"] = comps;
  return j;
}

ojson ablation_json(const std::vector<ResultRow>& rows) {
  ojson j;
  auto arr = ojson::array();
  for (const auto& r : rows) arr.push_back(result_row_json(r));
  j["rows"] = arr;
  // Each reduced subset against the full feature set.
  auto comps = ojson::array();
  if (rows.size() > 1) {
    const auto& best = rows.back();
    const int m = static_cast<int>(rows.size()) - 1;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      auto t = compare_models(best.fold_f1, rows[i].fold_f1, m);
      comps.push_back({{"a", best.label}, {"b", rows[i].label}, {"t", t.degenerate ? 0.0 : t.t}, {"p", t.p},
                       {"p_bonferroni", t.p_bonferroni}});
    }
  }
  j["comparisons"] = comps;
  return j;
}

}  // namespace

std::uint64_t PipelineConfig::lda_seed() const { return mix_seed(seed, kLdaStream); }
std::uint64_t PipelineConfig::feature_seed() const { return mix_seed(seed, kFeatureStream); }
std::uint64_t PipelineConfig::cv_seed() const { return mix_seed(seed, kCvStream); }

SynthConfig PipelineConfig::synth_config() const {
  SynthConfig s = synth;
  s.seed = synth_seed.value_or(seed);
  s.tau = labeling.tau;
  return s;
}

ModelSpec PipelineConfig::model_spec(ModelKind kind) const {
  ModelSpec spec;
  spec.kind = kind;
  spec.logreg.lambda = logreg_lambda;
  spec.logreg.max_iter = max_iter;
  spec.svm.lambda = svm_lambda;
  spec.svm.epochs = epochs;
  return spec;
}

CvConfig PipelineConfig::cv_config() const { return CvConfig{folds, cv_seed(), true}; }

PipelineConfig load_config(const fs::path& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, keys] : pt) {
    auto known = kConfigKeys.find(section);
    if (known == kConfigKeys.end()) throw UsageError("config: unknown section [" + section + "]");
    for (const auto& [key, _] : keys)
      if (!known->second.contains(key)) throw UsageError("config: unknown key " + section + "." + key);
  }
  const fs::path base = fs::absolute(path).parent_path();
  PipelineConfig c;
  c.seed = get_value<std::uint64_t>(pt, "run.seed", c.seed);
  c.strict = get_value<bool>(pt, "run.strict", c.strict);
  c.out_dir = resolve(base, get_value<std::string>(pt, "run.out", "out"));
  c.corpus = resolve(base, get_value<std::string>(pt, "paths.corpus", ""));
  c.dic = resolve(base, get_value<std::string>(pt, "paths.dic", ""));
  c.sentiment = resolve(base, get_value<std::string>(pt, "paths.sentiment", ""));
  c.stopwords = resolve(base, get_value<std::string>(pt, "paths.stopwords", ""));

  c.labeling.tau = get_value<double>(pt, "labeling.tau", c.labeling.tau);
  c.labeling.prefer_manual = get_value<bool>(pt, "labeling.prefer_manual", c.labeling.prefer_manual);
  c.labeling.validate();

  c.lda_topics = get_value<int>(pt, "lda.topics", c.lda_topics);
  if (pt.get_optional<std::string>("lda.alpha")) c.lda_alpha = get_value<double>(pt, "lda.alpha", 0.0);
  c.lda_beta = get_value<double>(pt, "lda.beta", c.lda_beta);
  c.lda_sweeps = get_value<int>(pt, "lda.sweeps", c.lda_sweeps);
  c.lda_infer_sweeps = get_value<int>(pt, "lda.infer_sweeps", c.lda_infer_sweeps);
  if (auto boards = pt.get_optional<std::string>("lda.exclude_boards")) {
    c.exclude_boards.clear();
    for (const auto& b : split(*boards, ','))
      if (!trim(b).empty()) c.exclude_boards.push_back(trim(b));
  }
  c.relevance_lambda = get_value<double>(pt, "lda.relevance_lambda", c.relevance_lambda);
  c.relevance_top_n = get_value<std::size_t>(pt, "lda.top_terms", c.relevance_top_n);
  if (c.lda_topics < 2) throw UsageError("lda.topics must be >= 2");
  if (!(c.lda_beta > 0.0)) throw UsageError("lda.beta must be positive");
  if (c.lda_alpha && !(*c.lda_alpha > 0.0)) throw UsageError("lda.alpha must be positive");
  if (!(c.relevance_lambda >= 0.0 && c.relevance_lambda <= 1.0)) throw UsageError("lda.relevance_lambda must lie in [0, 1]");

  c.min_df = get_value<int>(pt, "features.min_df", c.min_df);
  c.strategy = strategy_from_string(get_value<std::string>(pt, "features.strategy", "separate_symmetric"));
  c.assembly.target_only_includes_shared =
      get_value<bool>(pt, "features.target_only_includes_shared", c.assembly.target_only_includes_shared);

  c.model = model_kind_from_string(get_value<std::string>(pt, "learn.model", "logreg"));
  c.logreg_lambda = get_value<double>(pt, "learn.lambda", c.logreg_lambda);
  c.svm_lambda = get_value<double>(pt, "learn.svm_lambda", c.svm_lambda);
  c.max_iter = get_value<int>(pt, "learn.max_iter", c.max_iter);
  c.epochs = get_value<int>(pt, "learn.epochs", c.epochs);
  c.folds = get_value<int>(pt, "learn.folds", c.folds);
  c.repeats = get_value<int>(pt, "learn.repeats", c.repeats);
  c.top_k = get_value<std::size_t>(pt, "learn.top_k", c.top_k);
  if (c.folds < 2) throw UsageError("learn.folds must be >= 2");
  if (c.repeats < 1) throw UsageError("learn.repeats must be >= 1");
  if (!(c.logreg_lambda >= 0.0)) throw UsageError("learn.lambda must be nonnegative");
  if (!(c.svm_lambda > 0.0)) throw UsageError("learn.svm_lambda must be positive");

  auto& s = c.synth;
  s.n_threads = get_value<int>(pt, "synth.n_threads", s.n_threads);
  s.vocab_size = get_value<int>(pt, "synth.vocab_size", s.vocab_size);
  s.n_planted_topics = get_value<int>(pt, "synth.n_planted_topics", s.n_planted_topics);
  s.base_green_transition = get_value<double>(pt, "synth.base_green_transition", s.base_green_transition);
  s.supportive_boost = get_value<double>(pt, "synth.supportive_boost", s.supportive_boost);
  s.supportive_rate = get_value<double>(pt, "synth.supportive_rate", s.supportive_rate);
  s.mean_replies = get_value<double>(pt, "synth.mean_replies", s.mean_replies);
  s.label_noise = get_value<double>(pt, "synth.label_noise", s.label_noise);
  s.length_decay = get_value<double>(pt, "synth.length_decay", s.length_decay);
  s.relapse = get_value<double>(pt, "synth.relapse", s.relapse);
  if (pt.get_optional<std::string>("synth.seed")) c.synth_seed = get_value<std::uint64_t>(pt, "synth.seed", 0);
  c.synth_config().validate();
  return c;
}

void run_synth(const PipelineConfig& cfg) {
  auto corpus = generate_corpus(cfg.synth_config());
  write_file_atomic(cfg.corpus_path(), corpus.posts_jsonl());
  write_file_atomic(cfg.out_dir / "ground_truth.csv", corpus.ground_truth_csv());
  write_file_atomic(cfg.out_dir / "thread_truth.csv", corpus.thread_truth_csv());
  spdlog::info("synth: wrote {} posts in {} threads to {}", corpus.posts.size(), corpus.threads.size(),
               cfg.corpus_path().string());
}

nlohmann::ordered_json run_ingest(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  ojson j;
  j["posts"] = corpus.post_count();
  j["threads"] = corpus.threads.size();
  j["corpus_fingerprint"] = file_fingerprint(cfg.corpus_path());
  write_json(cfg.out_dir / "ingest.json", j);
  spdlog::info("ingest: {} posts, {} threads", corpus.post_count(), corpus.threads.size());
  return j;
}

nlohmann::ordered_json run_extract(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  auto threads = extract_nonempty(cfg, corpus);
  auto stats = describe_threads(threads);
  auto engagement = engagement_green_rate(threads);

  auto list = ojson::array();
  for (const auto& ft : threads)
    list.push_back({{"thread_id", ft.thread.thread_id},
                    {"target_user_id", ft.target_user_id},
                    {"prediction_index", ft.prediction_index},
                    {"y", std::string(to_string(ft.y))},
                    {"y_q", ft.y_q}});
  write_json(cfg.out_dir / "threads.json", list);
  auto j = stats_to_json(stats, engagement);
  write_json(cfg.out_dir / "stats.json", j);
  write_file_atomic(cfg.out_dir / "histogram.csv", engagement_csv(engagement));
  spdlog::info("extract: {} flagged threads of {}", threads.size(), corpus.threads.size());
  return j;
}

std::vector<std::vector<std::string>> lda_documents(const Corpus& corpus, const std::vector<std::string>& exclude_boards,
                                                    const std::set<std::string>& stopwords) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& t : corpus.threads)
    for (const auto& p : t.posts) {
      if (std::find(exclude_boards.begin(), exclude_boards.end(), p.board) != exclude_boards.end()) continue;
      auto terms = content_terms(tokenize(p.body), stopwords);
      if (!terms.empty()) docs.push_back(std::move(terms));
    }
  return docs;
}

nlohmann::ordered_json run_lda_fit(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  auto docs = lda_documents(corpus, cfg.exclude_boards, run_stopwords(cfg));
  LdaConfig lc;
  lc.topics = cfg.lda_topics;
  lc.alpha = cfg.lda_alpha;
  lc.beta = cfg.lda_beta;
  lc.sweeps = cfg.lda_sweeps;
  lc.seed = cfg.lda_seed();
  auto model = fit_lda(docs, lc);
  write_json(cfg.out_dir / "lda_model.json", model.to_json());

  ojson topics = ojson::array();
  auto ranked = relevance_terms(model, cfg.relevance_lambda, cfg.relevance_top_n);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    auto terms = ojson::array();
    for (const auto& t : ranked[k]) terms.push_back({{"term", t.term}, {"relevance", t.relevance}});
    topics.push_back({{"topic", k}, {"terms", terms}});
  }
  ojson j;
  j["lambda"] = cfg.relevance_lambda;
  j["documents"] = docs.size();
  j["topics"] = topics;
  write_json(cfg.out_dir / "topics.json", j);
  spdlog::info("lda-fit: K={} over {} documents, {} terms", model.topics(), docs.size(), model.vocab_size());
  return j;
}

FeatureResources load_resources(const PipelineConfig& cfg) {
  if (cfg.dic.empty()) throw UsageError("paths.dic is not configured");
  if (cfg.sentiment.empty()) throw UsageError("paths.sentiment is not configured");
  return FeatureResources{load_dic_file(cfg.dic.string()),
                          load_sentiment_file(cfg.sentiment.string()),
                          LdaModel::from_json(read_json(cfg.out_dir / "lda_model.json")),
                          vocab_from_json(read_json(cfg.out_dir / "vocab.json")),
                          cfg.lda_infer_sweeps,
                          cfg.feature_seed()};
}

nlohmann::ordered_json run_featurize(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  std::vector<std::vector<Token>> docs;
  for (const auto& t : corpus.threads)
    for (const auto& p : t.posts) docs.push_back(tokenize(p.body));
  auto vocab = build_tfidf_vocab(docs, cfg.min_df, run_stopwords(cfg));
  write_json(cfg.out_dir / "vocab.json", vocab_to_json(vocab));

  auto res = load_resources(cfg);
  auto threads = extract_nonempty(cfg, corpus);
  auto blocks = compute_blocks(threads, res);
  Dataset d = dataset_from_blocks(blocks, threads, cfg.strategy, res, cfg.assembly);
  d.fingerprints = current_fingerprints(cfg);
  write_dataset(cfg.out_dir / "features", d);
  ojson j;
  j["rows"] = d.X.rows();
  j["dims"] = d.X.cols();
  j["strategy"] = d.strategy;
  j["vocab_terms"] = vocab.terms.size();
  spdlog::info("featurize: {} x {} ({})", d.X.rows(), d.X.cols(), d.strategy);
  return j;
}

nlohmann::ordered_json run_cv(const PipelineConfig& cfg) {
  Dataset d = load_features(cfg);
  auto cv = kfold_cv(d.X, d.y, cfg.model_spec(cfg.model), cfg.cv_config());
  auto j = cv_json(cv, d, cfg.model);
  write_json(cfg.out_dir / "cv.json", j);
  spdlog::info("cv: {} macro-F1 {:.4f}", to_string(cfg.model), cv.mean_macro_f1());
  return j;
}

std::vector<std::set<std::string>> default_ablation_subsets() {
  return {{"liwc"}, {"liwc", "sent"}, {"liwc", "sent", "lda"}, {"liwc", "sent", "lda", "tok"}};
}

nlohmann::ordered_json run_ablate(const PipelineConfig& cfg) {
  Dataset d = load_features(cfg);
  auto rows = ablation_run(d, default_ablation_subsets(), cfg.model_spec(cfg.model), cfg.cv_config());
  write_file_atomic(cfg.out_dir / "ablation.csv", results_csv(rows));
  auto j = ablation_json(rows);
  write_json(cfg.out_dir / "ablation.json", j);
  return j;
}

nlohmann::ordered_json run_strategies(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  auto res = load_resources(cfg);
  auto threads = extract_nonempty(cfg, corpus);
  auto blocks = compute_blocks(threads, res);
  auto report = strategy_run(blocks, threads, res, cfg.model_spec(cfg.model), cfg.cv_config(), cfg.repeats,
                             cfg.assembly);
  write_file_atomic(cfg.out_dir / "strategies.csv", results_csv(report.rows));
  auto j = strategy_json(report);
  write_json(cfg.out_dir / "strategies.json", j);
  return j;
}

nlohmann::ordered_json run_proc(const PipelineConfig& cfg) {
  auto stored = cv_from_json(read_ojson(cfg.out_dir / "cv.json"));
  auto result = proc_analyze(stored.cv.oof_scores, stored.q);
  write_file_atomic(cfg.out_dir / "proc.csv", proc_csv(result.curve));
  write_file_atomic(cfg.out_dir / "proc_optimal.csv", proc_csv(result.optimal));
  ojson j;
  j["auc"] = result.curve.auc;
  j["optimal_auc"] = result.optimal.auc;
  j["auc_ratio"] = result.curve.auc / result.optimal.auc;
  write_json(cfg.out_dir / "proc.json", j);
  return j;
}

nlohmann::ordered_json run_report(const PipelineConfig& cfg) {
  Corpus corpus = load_run_corpus(cfg);
  auto threads = extract_nonempty(cfg, corpus);
  Dataset d = load_features(cfg);
  if (d.ids.size() != threads.size()) throw DataError("feature matrix rows do not match extracted threads");
  for (std::size_t i = 0; i < threads.size(); ++i)
    if (d.ids[i] != threads[i].thread.thread_id) throw DataError("feature matrix rows do not match extracted threads");

  ojson report;
  report["generated_at"] = now_utc();
  report["seed"] = cfg.seed;
  report["fingerprints"] = d.fingerprints;
  report["stats"] = stats_to_json(describe_threads(threads), engagement_green_rate(threads));

  // cv.json is the primary model's run; reuse it when present.
  const auto cv_path = cfg.out_dir / "cv.json";
  ojson cv_j = fs::exists(cv_path) ? read_ojson(cv_path) : run_cv(cfg);
  auto stored = cv_from_json(cv_j);
  if (stored.ids != d.ids) throw DataError("cv.json does not match the current feature matrix");
  report["cv"] = {{"model", cv_j["model"]}, {"mean", cv_j["mean"]}, {"pooled", cv_j["pooled"]},
                  {"folds", cv_j["folds"]}};

  auto proc = proc_analyze(stored.cv.oof_scores, d.q);
  report["proc"] = {{"auc", proc.curve.auc},
                    {"optimal_auc", proc.optimal.auc},
                    {"auc_ratio", proc.curve.auc / proc.optimal.auc}};

  // Method comparison on identical folds.
  ojson models = ojson::array();
  std::vector<std::vector<double>> model_f1;
  const ModelKind kinds[3] = {ModelKind::majority, ModelKind::svm, ModelKind::logreg};
  for (ModelKind k : kinds) {
    auto cv = kfold_cv(d.X, d.y, cfg.model_spec(k), cfg.cv_config());
    auto pr = proc_analyze(cv.oof_scores, d.q);
    model_f1.push_back(cv.fold_macro_f1());
    models.push_back({{"model", std::string(to_string(k))},
                      {"precision", cv.mean_macro_precision()},
                      {"recall", cv.mean_macro_recall()},
                      {"f1", cv.mean_macro_f1()},
                      {"auc", pr.curve.auc}});
  }
  auto comps = ojson::array();
  for (int i = 0; i < 2; ++i) {
    auto t = compare_models(model_f1[2], model_f1[i], 2);
    comps.push_back({{"a", "logreg"}, {"b", std::string(to_string(kinds[i]))}, {"t", t.degenerate ? 0.0 : t.t},
                     {"p", t.p}, {"p_bonferroni", t.p_bonferroni}});
  }
  report["models"] = {{"rows", models}, {"comparisons", comps}};

  const auto abl_path = cfg.out_dir / "ablation.json";
  report["ablation"] = fs::exists(abl_path) ? read_ojson(abl_path) : run_ablate(cfg);
  const auto strat_path = cfg.out_dir / "strategies.json";
  report["strategies"] = fs::exists(strat_path) ? read_ojson(strat_path) : run_strategies(cfg);

  // Importance from a model fit on all threads.
  auto standardizer = Standardizer::fit(d.X);
  auto full = train_logreg(standardizer.apply(d.X), d.y,
                           LogregConfig{cfg.logreg_lambda, cfg.max_iter, 1e-6, cfg.cv_seed()});
  report["importance"] = importance_to_json(top_features(full, d.group_map, d.feature_names, cfg.top_k));
  std::string gm;
  for (const auto& g : d.group_map) gm += g.name + ":" + std::to_string(g.begin) + "-" + std::to_string(g.end) + ";";
  write_json(cfg.out_dir / "model.json", model_to_json(full, &standardizer, hex64(fnv1a(gm))));

  report["diagnostics"] = diagnostics_json(thread_diagnostics(stored.cv, threads));
  const auto topics_path = cfg.out_dir / "topics.json";
  if (fs::exists(topics_path)) report["topics"] = read_ojson(topics_path);

  write_json(cfg.out_dir / "report.json", report);
  spdlog::info("report: wrote {}", (cfg.out_dir / "report.json").string());
  return report;
}

}  // namespace triage
