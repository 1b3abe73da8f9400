#include "triage/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "triage/util.hpp"

namespace triage {

ProcCurve proc_curve(std::span<const double> scores, std::span<const double> q) {
  if (scores.size() != q.size()) throw std::invalid_argument("proc: scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("proc: empty input");
  double pos = 0.0, neg = 0.0;
  for (double v : q) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("proc: label outside [0, 1]");
    pos += v;
    neg += 1.0 - v;
  }
  if (!(pos > 0.0) || !(neg > 0.0)) throw DataError("proc: labels are all 0 or all 1, rates undefined");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  ProcCurve c;
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double theta = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == theta; ++i) {
      tp += q[order[i]];
      fp += 1.0 - q[order[i]];
    }
    c.points.push_back({theta, std::min(1.0, fp / neg), std::min(1.0, tp / pos)});
  }
  // Accumulated rounding can leave the last point a hair short of the corner.
  c.points.back().fpr = 1.0;
  c.points.back().tpr = 1.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const auto& a = c.points[i - 1];
    const auto& b = c.points[i];
    c.auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return c;
}

ProcResult proc_analyze(std::span<const double> scores, std::span<const double> q) {
  return {proc_curve(scores, q), proc_curve(q, q)};
}

std::string proc_csv(const ProcCurve& curve) {
  std::ostringstream ss;
  ss << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    ss << (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) << ','
       << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  return ss.str();
}

ResultRow row_from_cv(std::string label, std::size_t dims, const CvResult& cv) {
  ResultRow r;
  r.label = std::move(label);
  r.dims = dims;
  r.precision = cv.mean_macro_precision();
  r.recall = cv.mean_macro_recall();
  r.f1 = cv.mean_macro_f1();
  r.fold_f1 = cv.fold_macro_f1();
  return r;
}

std::vector<ResultRow> ablation_run(const Dataset& data, const std::vector<std::set<std::string>>& subsets,
                                    const ModelSpec& spec, const CvConfig& cv) {
  if (subsets.empty()) throw UsageError("ablation needs at least one feature-group subset");
  std::vector<ResultRow> rows;
  for (const auto& subset : subsets) {
    Dataset sub = select_groups(data, subset);
    std::string label;
    // Canonical family order first, then anything unrecognized alphabetically.
    for (const char* fam : {"liwc", "sent", "lda", "tok"})
      if (subset.contains(fam)) label += (label.empty() ? "" : "+") + std::string(fam);
    for (const auto& fam : subset)
      if (fam != "liwc" && fam != "sent" && fam != "lda" && fam != "tok" && fam != "shared")
        label += (label.empty() ? "" : "+") + fam;
    label += (label.empty() ? "" : "+") + std::string("shared");
    rows.push_back(row_from_cv(label, sub.X.cols(), kfold_cv(sub.X, sub.y, spec, cv)));
  }
  return rows;
}

StrategyReport strategy_run(const std::vector<ThreadBlocks>& blocks, const std::vector<FlaggedThread>& threads,
                            const FeatureResources& res, const ModelSpec& spec, const CvConfig& cv, int repeats,
                            const AssemblyOptions& opts) {
  if (repeats < 1) throw UsageError("strategy repeats must be >= 1");
  const AssemblyStrategy order[3] = {AssemblyStrategy::TargetOnly, AssemblyStrategy::Averaged,
                                     AssemblyStrategy::SeparateSymmetric};
  StrategyReport report;
  std::vector<std::vector<double>> scores(3);
  for (int s = 0; s < 3; ++s) {
    Dataset d = dataset_from_blocks(blocks, threads, order[s], res, opts);
    ResultRow row;
    for (int r = 0; r < repeats; ++r) {
      CvConfig c = cv;
      if (r > 0) c.seed = mix_seed(cv.seed, 1000 + static_cast<std::uint64_t>(r));
      auto result = kfold_cv(d.X, d.y, spec, c);
      if (r == 0) row = row_from_cv(std::string(to_string(order[s])), d.X.cols(), result);
      auto f1 = result.fold_macro_f1();
      scores[s].insert(scores[s].end(), f1.begin(), f1.end());
    }
    report.rows.push_back(std::move(row));
  }
  // Separate symmetric against each alternative.
  for (int s : {0, 1}) {
    report.comparisons.push_back({std::string(to_string(order[2])), std::string(to_string(order[s])),
                                  compare_models(scores[2], scores[s], 2)});
  }
  return report;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream ss;
  ss << "features,dims,Pr,Re,F1\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f", 100 * r.precision, 100 * r.recall, 100 * r.f1);
    ss << r.label << ',' << r.dims << ',' << buf << '\n';
  }
  return ss.str();
}

std::vector<GroupImportance> top_features(const LinearModel& model, const std::vector<GroupRange>& group_map,
                                          const std::vector<std::string>& names, std::size_t k) {
  if (names.size() != model.weights.size())
    throw std::invalid_argument("top_features: names and weights differ in length");
  std::vector<GroupImportance> out;
  for (const auto& g : group_map) {
    GroupImportance gi;
    gi.group = g.name;
    double n2 = 0.0;
    for (std::size_t i = g.begin; i < g.end; ++i) n2 += model.weights[i] * model.weights[i];
    const double norm = std::sqrt(n2);
    gi.all_zero = !(norm > 0.0);
    if (gi.all_zero) spdlog::warn("top_features: group {} has all-zero weights", g.name);
    for (std::size_t i = g.begin; i < g.end; ++i)
      gi.normalized.push_back({names[i], gi.all_zero ? 0.0 : model.weights[i] / norm});

    auto sorted = gi.normalized;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const WeightedFeature& a, const WeightedFeature& b) { return a.weight > b.weight; });
    const std::size_t take = std::min(k, sorted.size());
    gi.top_positive.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take));
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const WeightedFeature& a, const WeightedFeature& b) { return a.weight < b.weight; });
    gi.top_negative.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take));
    out.push_back(std::move(gi));
  }
  return out;
}

nlohmann::ordered_json importance_to_json(const std::vector<GroupImportance>& imp) {
  auto list = [](const std::vector<WeightedFeature>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& f : v) a.push_back({{"feature", f.name}, {"weight", f.weight}});
    return a;
  };
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& g : imp) j[g.group] = {{"top_positive", list(g.top_positive)}, {"top_negative", list(g.top_negative)}};
  return j;
}

double target_volatility(const FlaggedThread& ft) {
  std::vector<double> qs;
  for (std::size_t i = 0; i < ft.thread.posts.size(); ++i)
    if (ft.thread.posts[i].author_id == ft.target_user_id) qs.push_back(ft.post_q.at(i));
  return sample_stdev(qs);
}

ThreadDiagnostics thread_diagnostics(const CvResult& cv, const std::vector<FlaggedThread>& threads) {
  if (cv.oof_predictions.size() != threads.size())
    throw std::invalid_argument("thread_diagnostics: CV result does not cover the given threads");
  ThreadDiagnostics d;
  for (State cls : {State::green, State::flagged}) {
    std::vector<double> length, correct;
    for (std::size_t i = 0; i < threads.size(); ++i) {
      if (threads[i].y != cls) continue;
      length.push_back(static_cast<double>(threads[i].thread.posts.size()));
      correct.push_back(cv.oof_predictions[i] == cls ? 1.0 : 0.0);
    }
    if (length.size() < 3) {
      spdlog::warn("thread_diagnostics: fewer than 3 {} threads, correlation omitted", to_string(cls));
      continue;
    }
    (cls == State::green ? d.rho_green : d.rho_flagged) = pearson(length, correct);
  }
  std::vector<double> vol;
  for (const auto& ft : threads) vol.push_back(target_volatility(ft));
  if (!vol.empty()) {
    d.volatility_mean = mean(vol);
    std::sort(vol.begin(), vol.end());
    const std::size_t n = vol.size();
    d.volatility_median = n % 2 ? vol[n / 2] : 0.5 * (vol[n / 2 - 1] + vol[n / 2]);
  }
  return d;
}

}  // namespace triage
