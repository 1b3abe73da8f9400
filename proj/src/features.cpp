#include "triage/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "triage/util.hpp"

namespace triage {

namespace {

constexpr int kFeatureFileVersion = 1;

double l2(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [_, x] : v) s += x * x;
  return std::sqrt(s);
}

void normalize(SparseVector& v) {
  double n = l2(v);
  if (n > 0.0)
    for (auto& [_, x] : v) x /= n;
}

std::size_t block_dim(const FeatureResources& res) {
  return res.liwc.size() + 2 + static_cast<std::size_t>(res.lda.topics()) + res.vocab.terms.size();
}

constexpr std::size_t kSharedDim = 4;

void append_block(std::vector<double>& out, std::vector<GroupRange>& groups, const FeatureBlock& b,
                  const std::string& suffix, std::size_t vocab_size) {
  auto start = [&](const std::string& family) {
    groups.push_back({family + "_" + suffix, out.size(), out.size()});
  };
  start("liwc");
  out.insert(out.end(), b.liwc.begin(), b.liwc.end());
  groups.back().end = out.size();
  start("sent");
  out.push_back(b.sentiment.polarity);
  out.push_back(b.sentiment.subjectivity);
  groups.back().end = out.size();
  start("lda");
  out.insert(out.end(), b.lda.begin(), b.lda.end());
  groups.back().end = out.size();
  start("tok");
  std::size_t base = out.size();
  out.resize(base + vocab_size, 0.0);
  for (const auto& [i, x] : b.tokens) out[base + i] = x;
  groups.back().end = out.size();
}

FeatureBlock average_blocks(const FeatureBlock& a, const FeatureBlock& b) {
  FeatureBlock m;
  m.liwc.resize(a.liwc.size());
  for (std::size_t i = 0; i < a.liwc.size(); ++i) m.liwc[i] = 0.5 * (a.liwc[i] + b.liwc[i]);
  m.sentiment = {0.5 * (a.sentiment.polarity + b.sentiment.polarity),
                 0.5 * (a.sentiment.subjectivity + b.sentiment.subjectivity)};
  m.lda.resize(a.lda.size());
  for (std::size_t i = 0; i < a.lda.size(); ++i) m.lda[i] = 0.5 * (a.lda[i] + b.lda[i]);
  std::map<std::size_t, double> merged;
  for (const auto& [i, x] : a.tokens) merged[i] += 0.5 * x;
  for (const auto& [i, x] : b.tokens) merged[i] += 0.5 * x;
  for (const auto& [i, x] : merged)
    if (x != 0.0) m.tokens.emplace_back(i, x);
  normalize(m.tokens);
  return m;
}

}  // namespace

int TfidfVocab::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : it->second;
}

void TfidfVocab::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < terms.size(); ++i) index_[terms[i]] = static_cast<int>(i);
}

TfidfVocab build_tfidf_vocab(const std::vector<std::vector<Token>>& docs, int min_df,
                             const std::set<std::string>& stopwords) {
  if (docs.empty()) throw DataError("cannot build a tf-idf vocabulary from an empty corpus");
  std::map<std::string, int> df;
  for (const auto& doc : docs) {
    std::set<std::string> seen;
    for (const auto& t : doc) {
      if (t.numeric || stopwords.contains(t.text)) continue;
      seen.insert(t.text);
    }
    for (const auto& term : seen) ++df[term];
  }
  TfidfVocab v;
  v.n_docs = docs.size();
  v.min_df = min_df;
  v.stopwords = stopwords;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    v.terms.push_back(term);
    v.df.push_back(count);
    v.idf.push_back(std::log((n + 1.0) / (count + 1.0)) + 1.0);
  }
  if (v.terms.empty())
    throw DataError("tf-idf vocabulary is empty after filtering; lower min_df (currently " +
                    std::to_string(min_df) + ")");
  v.reindex();
  return v;
}

SparseVector tfidf_vector(std::span<const Token> tokens, const TfidfVocab& vocab) {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    int i = vocab.find(t.text);
    if (i >= 0) counts[static_cast<std::size_t>(i)] += 1.0;
  }
  SparseVector v;
  v.reserve(counts.size());
  for (const auto& [i, c] : counts) v.emplace_back(i, c * vocab.idf[i]);
  normalize(v);
  return v;
}

std::vector<std::string> content_terms(std::span<const Token> tokens, const std::set<std::string>& stopwords) {
  std::vector<std::string> out;
  for (const auto& t : tokens)
    if (!t.numeric && !stopwords.contains(t.text)) out.push_back(t.text);
  return out;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    for (const auto& t : tokenize(line)) out.insert(t.text);
  }
  return out;
}

FeatureBlock featurize_text(std::string_view text, const FeatureResources& res) {
  auto tokens = tokenize(text);
  FeatureBlock b;
  b.liwc = category_rates(tokens, res.liwc);
  b.sentiment = sentiment_score(tokens, res.sentiment);
  auto terms = content_terms(tokens, res.vocab.stopwords);
  b.lda = infer_theta(res.lda, terms, res.lda_infer_sweeps, mix_seed(res.seed, fnv1a(text)));
  b.tokens = tfidf_vector(tokens, res.vocab);
  return b;
}

FeatureBlock featurize_partition(std::span<const Post> posts, const FeatureResources& res) {
  std::string text;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (i) text.push_back('\n');
    text += posts[i].body;
  }
  return featurize_text(text, res);
}

SharedFeatures shared_features(const FlaggedThread& ft) {
  SharedFeatures s;
  bool seen_reply = false;
  for (std::size_t i = 0; i < ft.prediction_index; ++i) {
    const Post& p = ft.thread.posts[i];
    if (p.author_id == ft.target_user_id) {
      ++s.n_target_posts;
    } else {
      ++s.n_participant_posts;
      if (!seen_reply) {
        s.first_reply_q = ft.post_q.at(i);
        seen_reply = true;
      }
    }
    if (p.is_moderator) ++s.n_moderator_posts;
  }
  return s;
}

std::string_view to_string(AssemblyStrategy s) {
  switch (s) {
    case AssemblyStrategy::TargetOnly: return "target_only";
    case AssemblyStrategy::Averaged: return "averaged";
    case AssemblyStrategy::SeparateSymmetric: return "separate_symmetric";
  }
  return "?";
}

AssemblyStrategy strategy_from_string(std::string_view s) {
  if (s == "target_only") return AssemblyStrategy::TargetOnly;
  if (s == "averaged") return AssemblyStrategy::Averaged;
  if (s == "separate_symmetric") return AssemblyStrategy::SeparateSymmetric;
  throw UsageError("unknown strategy '" + std::string(s) +
                   "' (expected target_only, averaged or separate_symmetric)");
}

std::string group_family(std::string_view group_name) {
  return std::string(group_name.substr(0, group_name.find('_')));
}

FeatureVector assemble_blocks(const FeatureBlock& target, const FeatureBlock& participants,
                              const SharedFeatures& shared, AssemblyStrategy strategy,
                              const FeatureResources& res, const AssemblyOptions& opts) {
  FeatureVector fv;
  const std::size_t V = res.vocab.terms.size();
  fv.values.reserve(2 * block_dim(res) + kSharedDim);
  switch (strategy) {
    case AssemblyStrategy::SeparateSymmetric:
      append_block(fv.values, fv.group_map, target, "t", V);
      append_block(fv.values, fv.group_map, participants, "p", V);
      break;
    case AssemblyStrategy::Averaged:
      append_block(fv.values, fv.group_map, average_blocks(target, participants), "avg", V);
      break;
    case AssemblyStrategy::TargetOnly:
      append_block(fv.values, fv.group_map, target, "t", V);
      break;
  }
  if (strategy != AssemblyStrategy::TargetOnly || opts.target_only_includes_shared) {
    fv.group_map.push_back({"shared", fv.values.size(), fv.values.size() + kSharedDim});
    fv.values.push_back(shared.first_reply_q);
    fv.values.push_back(shared.n_target_posts);
    fv.values.push_back(shared.n_participant_posts);
    fv.values.push_back(shared.n_moderator_posts);
  }
  return fv;
}

FeatureVector assemble(const FlaggedThread& thread, AssemblyStrategy strategy, const FeatureResources& res,
                       const AssemblyOptions& opts) {
  return assemble_blocks(featurize_partition(thread.partition.target_posts, res),
                         featurize_partition(thread.partition.participant_posts, res), shared_features(thread),
                         strategy, res, opts);
}

std::vector<std::string> feature_names(AssemblyStrategy strategy, const FeatureResources& res,
                                       const AssemblyOptions& opts) {
  FeatureBlock empty;
  empty.liwc.assign(res.liwc.size(), 0.0);
  empty.lda.assign(res.lda.topics(), 0.0);
  auto fv = assemble_blocks(empty, empty, {}, strategy, res, opts);
  std::vector<std::string> names(fv.values.size());
  for (const auto& g : fv.group_map) {
    const std::string fam = group_family(g.name);
    for (std::size_t i = g.begin; i < g.end; ++i) {
      std::size_t j = i - g.begin;
      std::string leaf;
      if (fam == "liwc") leaf = res.liwc.categories()[j].name;
      else if (fam == "sent") leaf = j == 0 ? "polarity" : "subjectivity";
      else if (fam == "lda") leaf = "topic" + std::to_string(j);
      else if (fam == "tok") leaf = res.vocab.terms[j];
      else leaf = std::array<const char*, 4>{"first_reply_q", "n_target_posts", "n_participant_posts",
                                             "n_moderator_posts"}[j];
      names[i] = g.name + ":" + leaf;
    }
  }
  return names;
}

std::vector<ThreadBlocks> compute_blocks(const std::vector<FlaggedThread>& threads, const FeatureResources& res) {
  std::vector<ThreadBlocks> out;
  out.reserve(threads.size());
  for (const auto& ft : threads)
    out.push_back({featurize_partition(ft.partition.target_posts, res),
                   featurize_partition(ft.partition.participant_posts, res), shared_features(ft)});
  return out;
}

Dataset dataset_from_blocks(const std::vector<ThreadBlocks>& blocks, const std::vector<FlaggedThread>& threads,
                            AssemblyStrategy strategy, const FeatureResources& res, const AssemblyOptions& opts) {
  if (blocks.size() != threads.size()) throw std::invalid_argument("dataset_from_blocks: size mismatch");
  Dataset d;
  d.strategy = std::string(to_string(strategy));
  d.feature_names = feature_names(strategy, res, opts);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto fv = assemble_blocks(blocks[i].target, blocks[i].participants, blocks[i].shared, strategy, res, opts);
    if (i == 0) d.group_map = fv.group_map;
    d.X.append_row(fv.values);
    d.y.push_back(threads[i].y == State::green ? 1 : -1);
    d.q.push_back(threads[i].y_q);
    d.ids.push_back(threads[i].thread.thread_id);
  }
  if (blocks.empty()) d.group_map = assemble_blocks({}, {}, {}, strategy, res, opts).group_map;
  return d;
}

Dataset select_groups(const Dataset& data, const std::set<std::string>& families) {
  Dataset out;
  out.strategy = data.strategy;
  out.y = data.y;
  out.q = data.q;
  out.ids = data.ids;
  out.fingerprints = data.fingerprints;
  std::vector<std::size_t> cols;
  for (const auto& g : data.group_map) {
    const std::string fam = group_family(g.name);
    if (fam != "shared" && !families.contains(fam)) continue;
    out.group_map.push_back({g.name, cols.size(), cols.size() + (g.end - g.begin)});
    for (std::size_t c = g.begin; c < g.end; ++c) {
      cols.push_back(c);
      out.feature_names.push_back(data.feature_names.at(c));
    }
  }
  out.X = Matrix(data.X.rows(), cols.size());
  for (std::size_t r = 0; r < data.X.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out.X(r, j) = data.X(r, cols[j]);
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::vector<bool> sparse_col(data.X.cols(), false);
  for (const auto& g : data.group_map)
    if (group_family(g.name) == "tok")
      for (std::size_t c = g.begin; c < g.end; ++c) sparse_col[c] = true;

  nlohmann::ordered_json header;
  header["version"] = kFeatureFileVersion;
  header["strategy"] = data.strategy;
  header["rows"] = data.X.rows();
  header["dims"] = data.X.cols();
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : data.group_map) groups.push_back({{"name", g.name}, {"begin", g.begin}, {"end", g.end}});
  header["group_map"] = groups;
  header["feature_names"] = data.feature_names;
  header["fingerprints"] = data.fingerprints;

  std::ostringstream csv, coo;
  csv << "thread_id,y,y_q";
  for (std::size_t c = 0; c < data.X.cols(); ++c)
    if (!sparse_col[c]) csv << ',' << data.feature_names[c];
  csv << '\n';
  coo << "row,col,value\n";
  for (std::size_t r = 0; r < data.X.rows(); ++r) {
    csv << data.ids[r] << ',' << data.y[r] << ',' << format_double(data.q[r]);
    for (std::size_t c = 0; c < data.X.cols(); ++c) {
      if (!sparse_col[c]) {
        csv << ',' << format_double(data.X(r, c));
      } else if (data.X(r, c) != 0.0) {
        coo << r << ',' << c << ',' << format_double(data.X(r, c)) << '\n';
      }
    }
    csv << '\n';
  }
  write_file_atomic(dir / "features.json", header.dump(2) + "\n");
  write_file_atomic(dir / "features.csv", csv.str());
  write_file_atomic(dir / "features.coo", coo.str());
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset d;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_file(dir / "features.json"));
    if (header.at("version").get<int>() != kFeatureFileVersion) throw DataError("unsupported feature file version");
    d.strategy = header.at("strategy").get<std::string>();
    for (const auto& g : header.at("group_map"))
      d.group_map.push_back({g.at("name").get<std::string>(), g.at("begin").get<std::size_t>(),
                             g.at("end").get<std::size_t>()});
    d.feature_names = header.at("feature_names").get<std::vector<std::string>>();
    d.fingerprints = header.at("fingerprints").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed feature header: ") + e.what());
  }
  const std::size_t rows = header["rows"].get<std::size_t>();
  const std::size_t cols = header["dims"].get<std::size_t>();
  std::vector<bool> sparse_col(cols, false);
  for (const auto& g : d.group_map)
    if (group_family(g.name) == "tok")
      for (std::size_t c = g.begin; c < g.end; ++c) sparse_col[c] = true;
  d.X = Matrix(rows, cols);

  auto fail = [&](const std::string& what) { throw DataError("feature matrix in " + dir.string() + ": " + what); };
  std::istringstream csv(read_file(dir / "features.csv"));
  std::string line;
  std::getline(csv, line);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(csv, line)) fail("features.csv has fewer rows than the header declares");
    auto cells = split(line, ',');
    std::size_t expected = 3;
    for (bool s : sparse_col) expected += s ? 0 : 1;
    if (cells.size() != expected) fail("row " + std::to_string(r) + " has " + std::to_string(cells.size()) + " cells");
    d.ids.push_back(cells[0]);
    d.y.push_back(std::stoi(cells[1]));
    d.q.push_back(std::stod(cells[2]));
    std::size_t k = 3;
    for (std::size_t c = 0; c < cols; ++c)
      if (!sparse_col[c]) d.X(r, c) = std::stod(cells[k++]);
  }
  std::istringstream coo(read_file(dir / "features.coo"));
  std::getline(coo, line);
  while (std::getline(coo, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != 3) fail("malformed coordinate line '" + line + "'");
    std::size_t r = std::stoul(cells[0]), c = std::stoul(cells[1]);
    if (r >= rows || c >= cols || !sparse_col[c]) fail("coordinate out of range: " + line);
    d.X(r, c) = std::stod(cells[2]);
  }
  return d;
}

nlohmann::ordered_json vocab_to_json(const TfidfVocab& v) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["n_docs"] = v.n_docs;
  j["min_df"] = v.min_df;
  j["terms"] = v.terms;
  j["df"] = v.df;
  j["stopwords"] = v.stopwords;
  return j;
}

TfidfVocab vocab_from_json(const nlohmann::json& j) {
  TfidfVocab v;
  try {
    v.n_docs = j.at("n_docs").get<std::size_t>();
    v.min_df = j.at("min_df").get<int>();
    v.terms = j.at("terms").get<std::vector<std::string>>();
    v.df = j.at("df").get<std::vector<int>>();
    v.stopwords = j.at("stopwords").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tf-idf vocabulary: ") + e.what());
  }
  if (v.df.size() != v.terms.size()) throw DataError("tf-idf vocabulary df/terms length mismatch");
  const double n = static_cast<double>(v.n_docs);
  for (int df : v.df) v.idf.push_back(std::log((n + 1.0) / (df + 1.0)) + 1.0);
  v.reindex();
  return v;
}

}  // namespace triage
