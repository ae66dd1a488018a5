#include "crcal/recalibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crcal/calibration.hpp"
#include "crcal/errors.hpp"
#include "crcal/marginal.hpp"
#include "crcal/parallel.hpp"

namespace crcal {

std::string to_string(RecalibrationMethod method) {
  return method == RecalibrationMethod::AjOffset ? "aj" : "ts";
}

RecalibrationMethod parse_method(const std::string& text) {
  if (text == "aj" || text == "AJ_OFFSET") return RecalibrationMethod::AjOffset;
  if (text == "ts" || text == "TEMPERATURE") return RecalibrationMethod::Temperature;
  throw ValidationError("unknown recalibration method '" + text + "'");
}

namespace {

void check_fit_inputs(const Cohort& cal_cohort, const CifBundle& cal_bundle,
                      const TimeGrid& grid) {
  if (cal_cohort.empty()) throw ValidationError("calibration cohort is empty");
  require_aligned(cal_bundle, cal_cohort);
  if (grid.t_max() > cal_bundle.grid().t_max())
    throw ValidationError("recalibration grid extends past the calibration bundle horizon");
}

// Feasibility repair for one sample. candidates is [k-1][j]; repaired in place.
std::size_t repair_sample(std::vector<double>& candidates, int k_events, std::size_t d) {
  std::size_t clips = 0;
  const auto kk = static_cast<std::size_t>(k_events);
  std::vector<double> previous(kk, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double total = 0.0;
    double floor_total = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      double& v = candidates[k * d + j];
      const double original = v;
      v = std::clamp(v, 0.0, 1.0);
      v = std::max(v, previous[k]);
      if (v != original) ++clips;
      total += v;
      floor_total += previous[k];
    }
    if (total > 1.0 + CifBundle::kSumTolerance) {
      // Shrink only the increments over the previous time so monotonicity survives.
      const double cap = std::max(1.0, floor_total);
      const double scale = (cap - floor_total) / (total - floor_total);
      for (std::size_t k = 0; k < kk; ++k) {
        double& v = candidates[k * d + j];
        v = previous[k] + (v - previous[k]) * scale;
      }
      ++clips;
    }
    for (std::size_t k = 0; k < kk; ++k) previous[k] = candidates[k * d + j];
  }
  // A bundle needs a positive terminal value for every event.
  for (std::size_t k = 0; k < kk; ++k) {
    double& last = candidates[k * d + d - 1];
    if (last <= 0.0) {
      last = kTerminalFloor;
      ++clips;
    }
  }
  return clips;
}

RecalibratedBundle assemble(const CifBundle& source, const TimeGrid& grid,
                            std::vector<std::vector<double>> per_sample, std::size_t clips) {
  std::vector<double> values;
  values.reserve(source.size() * static_cast<std::size_t>(source.k_events()) * grid.size());
  for (auto& block : per_sample) values.insert(values.end(), block.begin(), block.end());
  return {CifBundle(grid, source.k_events(), source.sample_ids(), std::move(values)), clips};
}

}  // namespace

RecalibrationMap fit_aj_offsets(const Cohort& cal_cohort, const CifBundle& cal_bundle,
                                const TimeGrid& grid) {
  check_fit_inputs(cal_cohort, cal_bundle, grid);
  const auto marginal = aalen_johansen(cal_cohort);
  const int k_events = cal_cohort.k_events();
  const std::size_t d = grid.size();
  const double n = static_cast<double>(cal_bundle.size());
  RecalibrationMap map;
  map.method = RecalibrationMethod::AjOffset;
  map.grid = grid;
  map.k_events = k_events;
  map.offsets.assign(static_cast<std::size_t>(k_events + 1) * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double tau = grid[j];
    double mean_survival = 0.0;
    for (std::size_t s = 0; s < cal_bundle.size(); ++s)
      mean_survival += cal_bundle.survival(s, tau);
    map.offsets[j] = marginal.km_survival.at(tau) - mean_survival / n;
    for (int k = 1; k <= k_events; ++k)
      map.offsets[static_cast<std::size_t>(k) * d + j] =
          marginal.cif(k).at(tau) - mean_prediction(cal_bundle, k, tau);
  }
  return map;
}

RecalibratedBundle apply_offsets(const CifBundle& bundle, const RecalibrationMap& map) {
  if (map.method != RecalibrationMethod::AjOffset)
    throw ValidationError("method mismatch: map does not hold additive offsets");
  if (map.k_events != bundle.k_events())
    throw ValidationError("map and bundle disagree on the number of events");
  const std::size_t d = map.grid.size();
  const auto kk = static_cast<std::size_t>(bundle.k_events());
  std::vector<std::vector<double>> per_sample(bundle.size());
  std::vector<std::size_t> clips(bundle.size(), 0);
  parallel_for(bundle.size(), [&](std::size_t s) {
    auto& block = per_sample[s];
    block.resize(kk * d);
    for (std::size_t k = 0; k < kk; ++k)
      for (std::size_t j = 0; j < d; ++j)
        block[k * d + j] = bundle.cif(s, static_cast<int>(k + 1), map.grid[j]) +
                           map.offset(static_cast<int>(k + 1), j);
    clips[s] = repair_sample(block, bundle.k_events(), d);
  });
  const auto total = std::accumulate(clips.begin(), clips.end(), std::size_t{0});
  return assemble(bundle, map.grid, std::move(per_sample), total);
}

std::vector<double> power_normalize(const std::vector<double>& probabilities, double beta) {
  std::vector<double> logs(probabilities.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < logs.size(); ++c) {
    logs[c] = beta * std::log(probabilities[c] + kTemperatureEpsilon);
    top = std::max(top, logs[c]);
  }
  double total = 0.0;
  for (double& l : logs) total += (l = std::exp(l - top));
  for (double& l : logs) l /= total;
  return logs;
}

namespace {

// Class-wise mean of the power-normalized vectors.
void mean_scaled(const std::vector<double>& log_probs, std::size_t classes, double beta,
                 std::vector<double>& mean) {
  mean.assign(classes, 0.0);
  std::vector<double> w(classes);
  const std::size_t n = log_probs.size() / classes;
  for (std::size_t i = 0; i < n; ++i) {
    const double* l = log_probs.data() + i * classes;
    double top = l[0];
    for (std::size_t c = 1; c < classes; ++c) top = std::max(top, l[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += (w[c] = std::exp(beta * (l[c] - top)));
    for (std::size_t c = 0; c < classes; ++c) mean[c] += w[c] / total;
  }
  for (double& m : mean) m /= static_cast<double>(n);
}

}  // namespace

double fit_temperature_at(const std::vector<double>& log_probs, std::size_t classes,
                          const std::vector<double>& targets) {
  std::vector<double> mean;
  auto objective = [&](double log_beta) {
    mean_scaled(log_probs, classes, std::exp(log_beta), mean);
    double gap = 0.0;
    for (std::size_t k = 1; k < classes; ++k) gap += std::abs(targets[k - 1] - mean[k]);
    return gap;
  };

  const double lo = std::log(kTemperatureMin);
  const double hi = std::log(kTemperatureMax);
  const double step = (hi - lo) / (kTemperatureScanPoints - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int m = 0; m < kTemperatureScanPoints; ++m) {
    const double x = lo + step * m;
    const double v = objective(x);
    // Ties go to the scan point closest to beta = 1.
    if (v < best_value || (v == best_value && std::abs(x) < std::abs(lo + step * best))) {
      best = m;
      best_value = v;
    }
  }

  // Golden-section refinement in log(beta) over the neighbouring scan cells.
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kTemperatureScanPoints - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = objective(c);
  double fe = objective(e);
  while (b - a > kTemperatureTolerance) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = objective(e);
    }
  }
  double x = 0.5 * (a + b);
  double fx = objective(x);
  if (best_value < fx) {
    x = lo + step * best;
    fx = best_value;
  }
  if (objective(0.0) <= fx) x = 0.0;
  return std::exp(x);
}

namespace {

// Normalized (S, F_1..F_K) at tau; throws when the vector carries no mass.
void probability_vector(const CifBundle& bundle, std::size_t s, double tau,
                        std::vector<double>& p) {
  const int k_events = bundle.k_events();
  p.assign(static_cast<std::size_t>(k_events) + 1, 0.0);
  p[0] = bundle.survival(s, tau);
  double total = p[0];
  for (int k = 1; k <= k_events; ++k) total += (p[static_cast<std::size_t>(k)] = bundle.cif(s, k, tau));
  if (!(total > 0.0))
    throw ValidationError("sample " + bundle.sample_ids()[s] +
                          ": all-zero probability vector at time " + format_double(tau));
  for (double& v : p) v /= total;
}

}  // namespace

RecalibrationMap fit_temperature(const Cohort& cal_cohort, const CifBundle& cal_bundle,
                                 const TimeGrid& grid) {
  check_fit_inputs(cal_cohort, cal_bundle, grid);
  const auto marginal = aalen_johansen(cal_cohort);
  const int k_events = cal_cohort.k_events();
  const std::size_t classes = static_cast<std::size_t>(k_events) + 1;
  RecalibrationMap map;
  map.method = RecalibrationMethod::Temperature;
  map.grid = grid;
  map.k_events = k_events;
  map.temperatures.assign(grid.size(), 1.0);
  parallel_for(grid.size(), [&](std::size_t j) {
    const double tau = grid[j];
    std::vector<double> log_probs(cal_bundle.size() * classes);
    std::vector<double> p;
    for (std::size_t s = 0; s < cal_bundle.size(); ++s) {
      probability_vector(cal_bundle, s, tau, p);
      for (std::size_t c = 0; c < classes; ++c)
        log_probs[s * classes + c] = std::log(p[c] + kTemperatureEpsilon);
    }
    std::vector<double> targets;
    for (int k = 1; k <= k_events; ++k) targets.push_back(marginal.cif(k).at(tau));
    map.temperatures[j] = fit_temperature_at(log_probs, classes, targets);
  });
  return map;
}

RecalibratedBundle apply_temperature(const CifBundle& bundle, const RecalibrationMap& map) {
  if (map.method != RecalibrationMethod::Temperature)
    throw ValidationError("method mismatch: map does not hold temperatures");
  if (map.k_events != bundle.k_events())
    throw ValidationError("map and bundle disagree on the number of events");
  const std::size_t d = map.grid.size();
  const auto kk = static_cast<std::size_t>(bundle.k_events());
  std::vector<std::vector<double>> per_sample(bundle.size());
  std::vector<std::size_t> clips(bundle.size(), 0);
  parallel_for(bundle.size(), [&](std::size_t s) {
    auto& block = per_sample[s];
    block.resize(kk * d);
    std::vector<double> p;
    for (std::size_t j = 0; j < d; ++j) {
      probability_vector(bundle, s, map.grid[j], p);
      const auto scaled = power_normalize(p, map.temperatures[j]);
      for (std::size_t k = 0; k < kk; ++k) block[k * d + j] = scaled[k + 1];
    }
    clips[s] = repair_sample(block, bundle.k_events(), d);
  });
  const auto total = std::accumulate(clips.begin(), clips.end(), std::size_t{0});
  return assemble(bundle, map.grid, std::move(per_sample), total);
}

std::vector<PredictiveBound> upper_predictive_bound(const CifBundle& bundle, int k, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
  if (k < 1 || k > bundle.k_events()) throw ValidationError("event index out of range");
  const auto& times = bundle.grid().times();
  std::vector<PredictiveBound> out(bundle.size());
  for (std::size_t s = 0; s < bundle.size(); ++s) {
    const double terminal = bundle.terminal(s, k);
    out[s] = {bundle.grid().t_max(), true};
    if (!(terminal > 0.0)) continue;
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      if (bundle.at(s, k, j) / terminal >= 1.0 - gamma) {
        out[s] = {times[j], false};
        break;
      }
    }
  }
  return out;
}

}  // namespace crcal
