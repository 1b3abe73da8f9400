#include "triage/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "triage/util.hpp"

namespace triage {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_training_data(const Matrix& X, std::span<const int> y) {
  if (X.rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("training labels contain a single class");
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (double x : X.row(r))
      if (!std::isfinite(x)) throw DataError("non-finite feature value in row " + std::to_string(r));
}

double norm2(std::span<const double> v) { return dot(v, v); }

}  // namespace

Standardizer Standardizer::fit(const Matrix& train) {
  if (train.rows() == 0) throw std::invalid_argument("Standardizer::fit: no rows");
  Standardizer s;
  const std::size_t n = train.rows(), d = train.cols();
  s.mean_.assign(d, 0.0);
  s.std_.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) s.mean_[c] += train(r, c);
  for (double& m : s.mean_) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double dv = train(r, c) - s.mean_[c];
      s.std_[c] += dv * dv;
    }
  for (double& v : s.std_) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

Standardizer Standardizer::from_stats(std::vector<double> mean, std::vector<double> stdev) {
  if (mean.size() != stdev.size()) throw std::invalid_argument("Standardizer: stats length mismatch");
  Standardizer s;
  s.mean_ = std::move(mean);
  s.std_ = std::move(stdev);
  return s;
}

void Standardizer::apply_row(std::span<double> row) const {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean_[c]) / std_[c];
}

Matrix Standardizer::apply(const Matrix& rows) const {
  if (rows.cols() != mean_.size()) throw std::invalid_argument("Standardizer::apply: width mismatch");
  Matrix out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_row(out.row(r));
  return out;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::svm: return "svm";
    case ModelKind::majority: return "majority";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "logreg") return ModelKind::logreg;
  if (s == "svm") return ModelKind::svm;
  if (s == "majority") return ModelKind::majority;
  throw UsageError("unknown model kind '" + std::string(s) + "' (expected logreg, svm or majority)");
}

double LinearModel::margin(std::span<const double> x) const {
  if (kind == ModelKind::majority) return majority == State::green ? 1.0 : -1.0;
  return dot(weights, x) + bias;
}

double LinearModel::score(std::span<const double> x) const {
  switch (kind) {
    case ModelKind::logreg: return sigmoid(margin(x));
    case ModelKind::svm: return margin(x);
    case ModelKind::majority: return majority_score;
  }
  return 0.0;
}

State LinearModel::predict(std::span<const double> x) const {
  if (kind == ModelKind::majority) return majority;
  return margin(x) > 0.0 ? State::green : State::flagged;
}

double logreg_objective(const Matrix& X, std::span<const int> y, std::span<const double> w, double b,
                        double lambda, std::span<double> grad_w, double* grad_b) {
  const std::size_t n = X.rows();
  const bool want_grad = !grad_w.empty();
  if (want_grad) std::fill(grad_w.begin(), grad_w.end(), 0.0);
  double gb = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = X.row(i);
    const double yi = y[i];
    const double z = yi * (dot(w, x) + b);
    loss += softplus(-z);
    if (want_grad || grad_b) {
      const double coef = -yi * sigmoid(-z);
      if (want_grad)
        for (std::size_t j = 0; j < x.size(); ++j) grad_w[j] += coef * x[j];
      gb += coef;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (want_grad)
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] = grad_w[j] * inv_n + lambda * w[j];
  if (grad_b) *grad_b = gb * inv_n;
  return loss * inv_n + 0.5 * lambda * norm2(w);
}

LinearModel train_logreg(const Matrix& X, std::span<const int> y, const LogregConfig& cfg) {
  check_training_data(X, y);
  if (!(cfg.lambda >= 0.0)) throw UsageError("logreg lambda must be nonnegative");
  const std::size_t d = X.cols();
  std::vector<double> w(d, 0.0), gw(d), w_new(d);
  double b = 0.0, gb = 0.0;
  double loss = logreg_objective(X, y, w, b, cfg.lambda, gw, &gb);
  double step = 1.0;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    const double gnorm2 = norm2(gw) + gb * gb;
    if (std::sqrt(gnorm2) <= cfg.tol) break;
    double new_loss = 0.0;
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < d; ++j) w_new[j] = w[j] - step * gw[j];
      const double b_new = b - step * gb;
      new_loss = logreg_objective(X, y, w_new, b_new, cfg.lambda);
      if (new_loss <= loss - 1e-4 * step * gnorm2) {
        w.swap(w_new);
        b = b_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    loss = logreg_objective(X, y, w, b, cfg.lambda, gw, &gb);
    step *= 2.0;
  }
  LinearModel m;
  m.kind = ModelKind::logreg;
  m.weights = std::move(w);
  m.bias = b;
  m.reg_lambda = cfg.lambda;
  m.seed = cfg.seed;
  m.final_loss = loss;
  m.iterations = it;
  return m;
}

double svm_objective(const Matrix& X, std::span<const int> y, std::span<const double> w, double b, double lambda,
                     std::span<double> subgrad_w, double* subgrad_b) {
  const std::size_t n = X.rows();
  const bool want = !subgrad_w.empty();
  if (want) std::fill(subgrad_w.begin(), subgrad_w.end(), 0.0);
  double gb = 0.0, hinge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = X.row(i);
    const double yi = y[i];
    const double m = yi * (dot(w, x) + b);
    if (m < 1.0) {
      hinge += 1.0 - m;
      if (want)
        for (std::size_t j = 0; j < x.size(); ++j) subgrad_w[j] -= yi * x[j];
      gb -= yi;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (want)
    for (std::size_t j = 0; j < w.size(); ++j) subgrad_w[j] = subgrad_w[j] * inv_n + lambda * w[j];
  if (subgrad_b) *subgrad_b = gb * inv_n;
  return hinge * inv_n + 0.5 * lambda * norm2(w);
}

LinearModel train_svm(const Matrix& X, std::span<const int> y, const SvmConfig& cfg) {
  check_training_data(X, y);
  if (!(cfg.lambda > 0.0)) throw UsageError("svm lambda must be positive");
  const std::size_t n = X.rows(), d = X.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  const double radius = 1.0 / std::sqrt(cfg.lambda);
  // The unregularized bias takes damped steps so early large steps do not swamp it.
  constexpr double kBiasRate = 0.01;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      auto x = X.row(i);
      const double yi = y[i];
      const double m = yi * (dot(w, x) + b);
      const double shrink = 1.0 - eta * cfg.lambda;
      for (double& wj : w) wj *= shrink;
      if (m < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * x[j];
        b += kBiasRate * eta * yi;
      }
      const double nw = std::sqrt(norm2(w));
      if (nw > radius)
        for (double& wj : w) wj *= radius / nw;
    }
  }
  LinearModel model;
  model.kind = ModelKind::svm;
  model.final_loss = svm_objective(X, y, w, b, cfg.lambda);
  model.weights = std::move(w);
  model.bias = b;
  model.reg_lambda = cfg.lambda;
  model.seed = cfg.seed;
  model.iterations = static_cast<int>(t);
  return model;
}

LinearModel majority_baseline(std::span<const int> y) {
  if (y.empty()) throw std::invalid_argument("majority_baseline: no labels");
  std::size_t green = std::count(y.begin(), y.end(), 1);
  LinearModel m;
  m.kind = ModelKind::majority;
  m.majority = 2 * green >= y.size() ? State::green : State::flagged;
  m.majority_score = static_cast<double>(green) / static_cast<double>(y.size());
  return m;
}

MetricsReport macro_prf(std::span<const State> y_true, std::span<const State> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("macro_prf: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("macro_prf: empty input");
  MetricsReport r;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++r.confusion[y_true[i] == State::green][y_pred[i] == State::green];
  for (int c = 0; c < 2; ++c) {
    const int tp = r.confusion[c][c];
    const int predicted = r.confusion[0][c] + r.confusion[1][c];
    const int actual = r.confusion[c][0] + r.confusion[c][1];
    auto& m = r.per_class[c];
    m.support = actual;
    m.precision = predicted ? static_cast<double>(tp) / predicted : 0.0;
    m.recall = actual ? static_cast<double>(tp) / actual : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  r.macro_precision = 0.5 * (r.per_class[0].precision + r.per_class[1].precision);
  r.macro_recall = 0.5 * (r.per_class[0].recall + r.per_class[1].recall);
  r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
  return r;
}

std::unique_ptr<Classifier> ModelSpec::train(const Matrix& X, std::span<const int> y, std::uint64_t seed) const {
  if (custom) return custom(X, y, seed);
  switch (kind) {
    case ModelKind::logreg: {
      auto c = logreg;
      c.seed = seed;
      return std::make_unique<LinearModel>(train_logreg(X, y, c));
    }
    case ModelKind::svm: {
      auto c = svm;
      c.seed = seed;
      return std::make_unique<LinearModel>(train_svm(X, y, c));
    }
    case ModelKind::majority:
      return std::make_unique<LinearModel>(majority_baseline(y));
  }
  throw std::logic_error("unhandled model kind");
}

std::vector<int> assign_folds(std::span<const int> y, const CvConfig& cfg) {
  const std::size_t n = y.size();
  if (cfg.folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (n < static_cast<std::size_t>(cfg.folds))
    throw DataError("cannot split " + std::to_string(n) + " samples into " + std::to_string(cfg.folds) + " folds");
  Rng rng(cfg.seed);
  std::vector<int> fold(n, -1);
  std::size_t next = 0;
  auto deal = [&](std::vector<std::size_t> idx) {
    rng.shuffle(idx);
    for (std::size_t i : idx) fold[i] = static_cast<int>(next++ % cfg.folds);
  };
  if (cfg.stratified) {
    std::vector<std::size_t> flagged, green;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? green : flagged).push_back(i);
    deal(std::move(green));
    deal(std::move(flagged));
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    deal(std::move(all));
  }
  return fold;
}

double CvResult::mean_macro_precision() const {
  double s = 0;
  for (const auto& f : folds) s += f.macro_precision;
  return s / static_cast<double>(folds.size());
}

double CvResult::mean_macro_recall() const {
  double s = 0;
  for (const auto& f : folds) s += f.macro_recall;
  return s / static_cast<double>(folds.size());
}

double CvResult::mean_macro_f1() const {
  double s = 0;
  for (const auto& f : folds) s += f.macro_f1;
  return s / static_cast<double>(folds.size());
}

std::vector<double> CvResult::fold_macro_f1() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.macro_f1);
  return out;
}

CvResult kfold_cv(const Matrix& X, std::span<const int> y, const ModelSpec& spec, const CvConfig& cfg) {
  if (X.rows() != y.size()) throw std::invalid_argument("kfold_cv: rows and labels differ in length");
  CvResult res;
  res.seed = cfg.seed;
  res.fold_of = assign_folds(y, cfg);
  const std::size_t n = y.size();
  res.oof_scores.assign(n, 0.0);
  res.oof_predictions.assign(n, State::flagged);
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (res.fold_of[i] == f ? test : train).push_back(i);
    std::vector<int> y_train;
    for (std::size_t i : train) y_train.push_back(y[i]);
    bool has_pos = std::count(y_train.begin(), y_train.end(), 1) > 0;
    bool has_neg = std::count(y_train.begin(), y_train.end(), -1) > 0;
    if (!has_pos || !has_neg)
      throw DataError("fold " + std::to_string(f) + " training split lacks a class; use fewer folds");
    Matrix x_train = X.take_rows(train);
    auto standardizer = Standardizer::fit(x_train);
    x_train = standardizer.apply(x_train);
    auto model = spec.train(x_train, y_train, mix_seed(cfg.seed, static_cast<std::uint64_t>(f)));
    std::vector<State> truth, pred;
    std::vector<double> row(X.cols());
    for (std::size_t i : test) {
      auto src = X.row(i);
      std::copy(src.begin(), src.end(), row.begin());
      standardizer.apply_row(row);
      res.oof_scores[i] = model->score(row);
      res.oof_predictions[i] = model->predict(row);
      truth.push_back(y[i] == 1 ? State::green : State::flagged);
      pred.push_back(res.oof_predictions[i]);
    }
    res.folds.push_back(macro_prf(truth, pred));
  }
  std::vector<State> truth(n);
  for (std::size_t i = 0; i < n; ++i) truth[i] = y[i] == 1 ? State::green : State::flagged;
  res.pooled = macro_prf(truth, res.oof_predictions);
  return res;
}

nlohmann::ordered_json model_to_json(const LinearModel& m, const Standardizer* standardizer,
                                     const std::string& group_fingerprint) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["kind"] = std::string(to_string(m.kind));
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["lambda"] = m.reg_lambda;
  j["seed"] = m.seed;
  j["final_loss"] = m.final_loss;
  j["iterations"] = m.iterations;
  if (m.kind == ModelKind::majority) j["majority"] = std::string(to_string(m.majority));
  if (standardizer) j["standardizer"] = {{"mean", standardizer->means()}, {"stdev", standardizer->stdevs()}};
  j["group_map_fingerprint"] = group_fingerprint;
  return j;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  const char* names[2] = {"flagged", "green"};
  for (int c = 0; c < 2; ++c)
    j[names[c]] = {{"precision", m.per_class[c].precision},
                   {"recall", m.per_class[c].recall},
                   {"f1", m.per_class[c].f1},
                   {"support", m.per_class[c].support}};
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_f1"] = m.macro_f1;
  j["confusion"] = m.confusion;
  return j;
}

}  // namespace triage
