#include "crcal/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "crcal/calibration.hpp"
#include "crcal/errors.hpp"

namespace crcal {

double kolmogorov_pvalue(double lambda) {
  // Below 0.2 the distribution function is under 1e-12 while the alternating
  // series loses all precision.
  if (!(lambda >= 0.2)) return 1.0;
  const double x = -2.0 * lambda * lambda;
  double sum = 0.0;
  for (int j = 1;; ++j) {
    const double term = std::exp(x * static_cast<double>(j) * static_cast<double>(j));
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("KS test needs a nonempty sample");
  std::vector<double> u(samples.begin(), samples.end());
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("KS sample value outside [0, 1]");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double rank = static_cast<double>(i + 1);
    d = std::max({d, rank / n - u[i], u[i] - (rank - 1.0) / n});
  }
  return {d, kolmogorov_pvalue(std::sqrt(n) * d)};
}

namespace {

std::size_t count_events(const Cohort& cohort, int k) {
  return static_cast<std::size_t>(std::count(cohort.events().begin(), cohort.events().end(), k));
}

TestSuite make_suite(int k_events, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("test level must lie in (0, 1)");
  TestSuite suite;
  suite.level = level;
  suite.threshold = level / k_events;
  suite.alt_threshold = level * k_events;
  return suite;
}

void record(TestSuite& suite, int k, double statistic, std::size_t n_eff) {
  TestResult r;
  r.statistic = statistic;
  r.n_effective = n_eff;
  r.level = suite.level;
  r.p_value = kolmogorov_pvalue(std::sqrt(static_cast<double>(n_eff)) * statistic);
  r.passed = r.p_value >= suite.threshold;
  suite.overall_passed = suite.overall_passed && r.passed;
  suite.overall_passed_alt = suite.overall_passed_alt && r.p_value >= suite.alt_threshold;
  suite.per_event[k] = r;
}

void record_untestable(TestSuite& suite, int k, const std::string& why) {
  TestResult r;
  r.testable = false;
  r.level = suite.level;
  suite.per_event[k] = r;
  suite.warnings.push_back("event " + std::to_string(k) + " not testable: " + why);
}

}  // namespace

TestSuite d_cal_test(const CifBundle& bundle, const Cohort& cohort, double level,
                     std::size_t rho_steps) {
  auto suite = make_suite(cohort.k_events(), level);
  for (int k = 1; k <= cohort.k_events(); ++k) {
    const std::size_t n_eff = count_events(cohort, k);
    if (n_eff == 0) {
      record_untestable(suite, k, "no observed occurrences");
      continue;
    }
    const auto obs = bucket_observations(bundle, cohort, k);
    const double d = deviation_norm(bucket_deviations(obs, k, rho_steps), kInfiniteAlpha);
    record(suite, k, d, n_eff);
  }
  return suite;
}

TestSuite pi_cal_test(const CifBundle& bundle, const MarginalCurveSet& marginal,
                      const Cohort& cohort, double level) {
  require_aligned(bundle, cohort);
  auto suite = make_suite(cohort.k_events(), level);
  const double t_max = bundle.grid().t_max();
  for (int k = 1; k <= cohort.k_events(); ++k) {
    const std::size_t n_eff = count_events(cohort, k);
    const double scale = marginal.cif(k).at(t_max);
    if (n_eff == 0) {
      record_untestable(suite, k, "no observed occurrences");
      continue;
    }
    if (!(scale > 0.0)) {
      record_untestable(suite, k, "marginal incidence is zero at the horizon");
      continue;
    }
    double sup = 0.0;
    for (double tau : bundle.grid().times())
      sup = std::max(sup, pi_cal_tau(bundle, marginal, k, tau));
    record(suite, k, sup / scale, n_eff);
  }
  return suite;
}

}  // namespace crcal
