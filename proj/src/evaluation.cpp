#include "crcal/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "crcal/calibration.hpp"
#include "crcal/errors.hpp"
#include "crcal/parallel.hpp"

namespace crcal {

std::optional<double> cr_c_index(const Cohort& cohort, const CifBundle& bundle, int k, double tau,
                                 const StepCurve& censoring) {
  require_aligned(bundle, cohort);
  if (k < 1 || k > cohort.k_events()) throw ValidationError("event index out of range");
  if (!(censoring.left_limit(tau) > 0.0))
    throw NumericError("censoring survival is zero before the C-index horizon");
  const std::size_t n = cohort.size();
  std::vector<double> score(n), g_left(n);
  for (std::size_t i = 0; i < n; ++i) {
    score[i] = bundle.cif(i, k, tau);
    g_left[i] = censoring.left_limit(cohort.time(i));
  }

  std::vector<double> row_num(n, 0.0), row_den(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const double ti = cohort.time(i);
    if (cohort.event(i) != k || ti > tau) return;
    if (!(g_left[i] > 0.0)) throw NumericError("censoring survival is zero at an event time");
    const double w1 = 1.0 / (g_left[i] * g_left[i]);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double tj = cohort.time(j);
      const int ej = cohort.event(j);
      double w = 0.0;
      if (ti < tj || (ti == tj && ej == 0)) {
        w = w1;
      } else if (ti >= tj && ej != k && ej != 0) {
        w = 1.0 / (g_left[i] * g_left[j]);
      } else {
        continue;
      }
      den += w;
      if (score[i] > score[j]) num += w;
    }
    row_num[i] = num;
    row_den[i] = den;
  });

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += row_num[i];
    den += row_den[i];
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

double brier_score(const Cohort& cohort, const CifBundle& bundle, int k, double tau,
                   const StepCurve& censoring) {
  require_aligned(bundle, cohort);
  if (k < 1 || k > cohort.k_events()) throw ValidationError("event index out of range");
  const double g_tau = censoring.at(tau);
  if (!(g_tau > 0.0)) throw NumericError("censoring survival is zero at the Brier horizon");
  double total = 0.0;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const double ti = cohort.time(i);
    const int ei = cohort.event(i);
    double weight = 0.0;
    double outcome = 0.0;
    if (ti <= tau && ei != 0) {
      const double g = censoring.left_limit(ti);
      if (!(g > 0.0)) throw NumericError("censoring survival is zero at an event time");
      weight = 1.0 / g;
      outcome = ei == k ? 1.0 : 0.0;
    } else if (ti > tau) {
      weight = 1.0 / g_tau;
    }
    const double r = outcome - bundle.cif(i, k, tau);
    total += weight * r * r;
  }
  return total / static_cast<double>(cohort.size());
}

double integrated_brier(const Cohort& cohort, const CifBundle& bundle, const TimeGrid& grid,
                        const StepCurve& censoring) {
  double total = 0.0;
  for (int k = 1; k <= cohort.k_events(); ++k) {
    double integral = 0.0;
    double previous = 0.0;
    for (double tau : grid.times()) {
      integral += brier_score(cohort, bundle, k, tau, censoring) * (tau - previous);
      previous = tau;
    }
    total += integral / grid.t_max();
  }
  return total / cohort.k_events();
}

TimeGrid ipcw_valid_grid(const TimeGrid& grid, const StepCurve& censoring) {
  std::vector<double> times;
  for (double t : grid.times())
    if (censoring.at(t) > 0.0) times.push_back(t);
  if (times.size() < 2)
    throw NumericError("fewer than two grid times have positive censoring survival");
  return TimeGrid(std::move(times));
}

std::vector<std::vector<double>> mean_incidence(const CifBundle& bundle) {
  if (bundle.size() == 0) throw ValidationError("empty bundle");
  std::vector<std::vector<double>> out;
  for (int k = 1; k <= bundle.k_events(); ++k) {
    std::vector<double> curve;
    for (double t : bundle.grid().times()) curve.push_back(mean_prediction(bundle, k, t));
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<double> default_horizons(const Cohort& cohort) {
  if (cohort.empty()) throw ValidationError("horizons need a nonempty cohort");
  std::vector<double> sorted = cohort.times();
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> out;
  for (std::size_t q : {1, 2, 3}) out.push_back(sorted[(q * n + 3) / 4 - 1]);
  return out;
}

EvaluationResult evaluate(const Cohort& cohort, const CifBundle& bundle) {
  require_aligned(bundle, cohort);
  const StepCurve censoring = censoring_survival(cohort);
  EvaluationResult result;
  double c_sum = 0.0;
  int c_count = 0;
  for (int k = 1; k <= cohort.k_events(); ++k) {
    for (double tau : default_horizons(cohort)) {
      CIndexEntry entry{k, tau, cr_c_index(cohort, bundle, k, tau, censoring)};
      if (entry.value) {
        c_sum += *entry.value;
        ++c_count;
      }
      result.c_index.push_back(entry);
    }
  }
  if (c_count > 0) result.mean_c_index = c_sum / c_count;
  result.ibs_grid = ipcw_valid_grid(bundle.grid(), censoring);
  for (int k = 1; k <= cohort.k_events(); ++k)
    for (double tau : result.ibs_grid.times())
      result.brier.push_back({k, tau, brier_score(cohort, bundle, k, tau, censoring)});
  result.ibs = integrated_brier(cohort, bundle, result.ibs_grid, censoring);
  result.mean_curves = mean_incidence(bundle);
  return result;
}

std::string serialize_mean_incidence(const CifBundle& bundle) {
  const auto curves = mean_incidence(bundle);
  std::string out = "event,time,mean_cif\n";
  for (std::size_t k = 0; k < curves.size(); ++k)
    for (std::size_t j = 0; j < curves[k].size(); ++j)
      out += std::to_string(k + 1) + "," + format_double(bundle.grid()[j]) + "," +
             format_double(curves[k][j]) + "\n";
  return out;
}

}  // namespace crcal
