#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/features.hpp"
#include "triage/learn.hpp"
#include "triage/stats.hpp"
#include "triage/threadex.hpp"

namespace triage {

struct RocPoint {
  double threshold;  // +inf for the (0,0) origin
  double fpr;
  double tpr;
};

struct ProcCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1), non-decreasing in both rates
  double auc = 0.0;
};

struct ProcResult {
  ProcCurve curve;
  ProcCurve optimal;  // the same construction with the labels themselves as scores
};

/// ROC over probabilistic labels q = P(positive), using expected true/false positive mass.
ProcCurve proc_curve(std::span<const double> scores, std::span<const double> q);
ProcResult proc_analyze(std::span<const double> scores, std::span<const double> q);

std::string proc_csv(const ProcCurve& curve);

struct ResultRow {
  std::string label;
  std::size_t dims = 0;
  double precision = 0.0;  // mean over folds of the macro value
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<double> fold_f1;
};

ResultRow row_from_cv(std::string label, std::size_t dims, const CvResult& cv);

/// One CV run per group subset on identical folds; shared features are always kept.
std::vector<ResultRow> ablation_run(const Dataset& data, const std::vector<std::set<std::string>>& subsets,
                                    const ModelSpec& spec, const CvConfig& cv);

struct StrategyComparison {
  std::string a;
  std::string b;
  PairedTTest test;
};

struct StrategyReport {
  std::vector<ResultRow> rows;  // TargetOnly, Averaged, SeparateSymmetric
  std::vector<StrategyComparison> comparisons;
};

/// CV for each assembly strategy on identical folds. With repeats > 1 each strategy is
/// evaluated on `repeats` reseeded fold splits and the per-fold macro-F1 scores are
/// compared with Bonferroni-adjusted paired t-tests.
StrategyReport strategy_run(const std::vector<ThreadBlocks>& blocks, const std::vector<FlaggedThread>& threads,
                            const FeatureResources& res, const ModelSpec& spec, const CvConfig& cv, int repeats = 1,
                            const AssemblyOptions& opts = {});

std::string results_csv(const std::vector<ResultRow>& rows);

struct WeightedFeature {
  std::string name;
  double weight;
};

struct GroupImportance {
  std::string group;
  std::vector<WeightedFeature> normalized;  // in feature order
  std::vector<WeightedFeature> top_positive;
  std::vector<WeightedFeature> top_negative;
  bool all_zero = false;
};

/// Weights divided by their group's l2 norm, with the k most positive and negative per group.
std::vector<GroupImportance> top_features(const LinearModel& model, const std::vector<GroupRange>& group_map,
                                          const std::vector<std::string>& names, std::size_t k);

nlohmann::ordered_json importance_to_json(const std::vector<GroupImportance>& imp);

struct ThreadDiagnostics {
  std::optional<PearsonResult> rho_green;
  std::optional<PearsonResult> rho_flagged;
  double volatility_mean = 0.0;
  double volatility_median = 0.0;
};

/// Length/correctness correlation per final class and within-thread volatility of the
/// target user's state. `cv` must be aligned with `threads`.
ThreadDiagnostics thread_diagnostics(const CvResult& cv, const std::vector<FlaggedThread>& threads);

/// Sample stdev of q over the target user's posts.
double target_volatility(const FlaggedThread& thread);

}  // namespace triage
