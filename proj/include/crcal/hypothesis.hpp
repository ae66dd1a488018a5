#pragma once

// Kolmogorov-Smirnov tests for both calibration notions, one test per event
// with a Bonferroni-corrected overall verdict.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crcal/data_model.hpp"
#include "crcal/marginal.hpp"

namespace crcal {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov tail P(K > lambda), clamped to [0, 1].
double kolmogorov_pvalue(double lambda);

// One-sample KS test against Uniform(0, 1).
KsResult ks_uniform(std::span<const double> samples);

struct TestResult {
  bool testable = true;
  double statistic = 0.0;
  std::size_t n_effective = 0;
  double p_value = 1.0;
  bool passed = true;
  double level = 0.05;
};

struct TestSuite {
  std::map<int, TestResult> per_event;
  double level = 0.05;
  double threshold = 0.0;      // level / K, the Bonferroni rule applied
  double alt_threshold = 0.0;  // level * K, reported for comparison only
  bool overall_passed = true;
  bool overall_passed_alt = true;
  std::vector<std::string> warnings;
};

// Statistic is the sup-norm bucket deviation, so censored mass enters exactly
// as in the distribution-calibration metric.
TestSuite d_cal_test(const CifBundle& bundle, const Cohort& cohort, double level,
                     std::size_t rho_steps);

// Statistic is the sup over the bundle grid of the marginal gap, normalized by
// the terminal Aalen-Johansen value.
TestSuite pi_cal_test(const CifBundle& bundle, const MarginalCurveSet& marginal,
                      const Cohort& cohort, double level);

}  // namespace crcal
