#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/matrix.hpp"

namespace triage {

/// Column statistics fitted on training rows only.
class Standardizer {
 public:
  static Standardizer fit(const Matrix& train);

  Matrix apply(const Matrix& rows) const;
  void apply_row(std::span<double> row) const;

  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& stdevs() const { return std_; }

  static Standardizer from_stats(std::vector<double> mean, std::vector<double> stdev);

 private:
  std::vector<double> mean_;
  std::vector<double> std_;  // population; 1 for constant columns
};

/// Scores a single feature row. Higher scores mean "more likely green".
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(std::span<const double> x) const = 0;
  virtual State predict(std::span<const double> x) const = 0;
};

enum class ModelKind { logreg, svm, majority };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

struct LinearModel final : Classifier {
  ModelKind kind = ModelKind::logreg;
  std::vector<double> weights;
  double bias = 0.0;
  double reg_lambda = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  int iterations = 0;
  /// Constant prediction of the majority baseline.
  State majority = State::green;
  double majority_score = 0.0;

  double margin(std::span<const double> x) const;
  /// Logistic probability for logreg, raw margin for svm, constant for majority.
  double score(std::span<const double> x) const override;
  State predict(std::span<const double> x) const override;
};

struct LogregConfig {
  double lambda = 1.0;
  int max_iter = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// Mean logistic loss plus (lambda/2)||w||^2 (bias unpenalized). Fills the gradient when
/// the output spans are non-empty.
double logreg_objective(const Matrix& X, std::span<const int> y, std::span<const double> w, double b,
                        double lambda, std::span<double> grad_w = {}, double* grad_b = nullptr);

/// Full-batch gradient descent with Armijo backtracking.
LinearModel train_logreg(const Matrix& X, std::span<const int> y, const LogregConfig& cfg = {});

struct SvmConfig {
  double lambda = 0.01;
  int epochs = 50;
  std::uint64_t seed = 0;
};

/// (lambda/2)||w||^2 + mean hinge loss, with one subgradient.
double svm_objective(const Matrix& X, std::span<const int> y, std::span<const double> w, double b, double lambda,
                     std::span<double> subgrad_w = {}, double* subgrad_b = nullptr);

/// Pegasos stochastic subgradient descent with a seeded shuffle per epoch.
LinearModel train_svm(const Matrix& X, std::span<const int> y, const SvmConfig& cfg = {});

/// Majority class of y (+1 green, -1 flagged); ties go to green.
LinearModel majority_baseline(std::span<const int> y);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
};

struct MetricsReport {
  std::array<ClassMetrics, 2> per_class;  // [flagged, green]
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  /// confusion[true][pred], index 0 flagged, 1 green.
  std::array<std::array<int, 2>, 2> confusion{};
};

MetricsReport macro_prf(std::span<const State> y_true, std::span<const State> y_pred);

/// Trains a classifier on already-standardized rows; hook point for models other than
/// the built-in linear ones.
using TrainerFn =
    std::function<std::unique_ptr<Classifier>(const Matrix& X, std::span<const int> y, std::uint64_t seed)>;

struct ModelSpec {
  ModelKind kind = ModelKind::logreg;
  LogregConfig logreg;
  SvmConfig svm;
  TrainerFn custom;  // overrides kind when set

  std::unique_ptr<Classifier> train(const Matrix& X, std::span<const int> y, std::uint64_t seed) const;
};

struct CvConfig {
  int folds = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Test-fold index for every sample.
std::vector<int> assign_folds(std::span<const int> y, const CvConfig& cfg);

struct CvResult {
  std::vector<MetricsReport> folds;
  std::vector<int> fold_of;
  std::vector<double> oof_scores;
  std::vector<State> oof_predictions;
  std::uint64_t seed = 0;
  MetricsReport pooled;  // metrics over all out-of-fold predictions

  double mean_macro_precision() const;
  double mean_macro_recall() const;
  double mean_macro_f1() const;
  std::vector<double> fold_macro_f1() const;
};

/// Stratified k-fold CV; the standardizer is refit on each training split.
CvResult kfold_cv(const Matrix& X, std::span<const int> y, const ModelSpec& spec, const CvConfig& cfg);

nlohmann::ordered_json model_to_json(const LinearModel& m, const Standardizer* standardizer = nullptr,
                                     const std::string& group_fingerprint = {});
nlohmann::ordered_json metrics_to_json(const MetricsReport& m);

}  // namespace triage
