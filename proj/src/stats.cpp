#include "triage/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

namespace triage {

double student_t_two_sided(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stdev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  PearsonResult r;
  if (sxx == 0.0 || syy == 0.0) {
    spdlog::warn("pearson: zero variance input, correlation defined as 0");
    r.degenerate = true;
    return r;
  }
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  double denom = 1.0 - r.rho * r.rho;
  if (denom <= 0.0) {
    r.p = 0.0;
  } else {
    double t = r.rho * std::sqrt((n - 2.0) / denom);
    r.p = student_t_two_sided(t, n - 2.0);
  }
  return r;
}

PairedTTest compare_models(std::span<const double> a, std::span<const double> b, int m_comparisons) {
  if (a.size() != b.size()) throw std::invalid_argument("compare_models: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("compare_models: need at least 2 paired scores");
  if (m_comparisons < 1) throw std::invalid_argument("compare_models: m_comparisons must be >= 1");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  double md = mean(d);
  double sd = sample_stdev(d);
  PairedTTest r;
  if (sd == 0.0) {
    spdlog::warn("compare_models: differences have zero variance");
    r.degenerate = true;
    if (md != 0.0) {
      r.t = std::copysign(INFINITY, md);
      r.p = 0.0;
    } else {
      r.t = 0.0;
      r.p = 1.0;
    }
  } else {
    r.t = md / (sd / std::sqrt(n));
    r.p = student_t_two_sided(r.t, n - 1.0);
  }
  r.p_bonferroni = std::min(1.0, r.p * m_comparisons);
  return r;
}

CountSummary summarize_counts(std::span<const int> counts) {
  if (counts.empty()) throw std::invalid_argument("summarize_counts: empty input");
  CountSummary s;
  std::vector<double> v(counts.begin(), counts.end());
  s.mean = mean(v);
  s.stdev = sample_stdev(v);
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  for (int c : counts) ++s.histogram[c];
  int best = 0;
  for (const auto& [value, freq] : s.histogram) {
    // std::map iterates ascending, so strict > keeps the smallest tied value.
    if (freq > best) {
      best = freq;
      s.mode = value;
    }
  }
  return s;
}

}  // namespace triage
