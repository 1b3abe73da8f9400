#pragma once

// Significance tests and summaries shared by the learning and evaluation code.

#include <map>
#include <span>
#include <vector>

namespace triage {

struct PearsonResult {
  double rho = 0.0;
  double p = 1.0;  // two-sided
  /// True when either input had zero variance; rho and p then take their defined defaults.
  bool degenerate = false;
};

/// Sample Pearson correlation with a t-distribution p-value on n-2 dof. Requires n >= 3.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct PairedTTest {
  double t = 0.0;
  double p = 1.0;             // two-sided
  double p_bonferroni = 1.0;  // min(1, p * m)
  bool degenerate = false;    // zero-variance differences
};

/// Paired Student t-test on a[i] - b[i] with a Bonferroni correction for m comparisons.
PairedTTest compare_models(std::span<const double> a, std::span<const double> b, int m_comparisons);

/// Two-sided tail probability of |T| >= |t| for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

double mean(std::span<const double> v);
/// Sample (n-1) standard deviation; 0 for n < 2.
double sample_stdev(std::span<const double> v);

struct CountSummary {
  double mean = 0.0;
  double median = 0.0;
  int mode = 0;  // smallest among the most frequent values
  double stdev = 0.0;
  std::map<int, int> histogram;
};

CountSummary summarize_counts(std::span<const int> counts);

}  // namespace triage
