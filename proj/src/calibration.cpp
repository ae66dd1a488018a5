#include "crcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crcal/errors.hpp"

namespace crcal {

void MetricParams::validate() const {
  if (!(alpha >= 1.0)) throw ValidationError("alpha must be at least 1 (or infinite)");
  if (rho_steps < 1) throw ValidationError("rho steps must be positive");
}

std::vector<BucketObservation> bucket_observations(const CifBundle& bundle, const Cohort& cohort,
                                                   int k) {
  require_aligned(bundle, cohort);
  if (k < 1 || k > cohort.k_events()) throw ValidationError("event index out of range");
  std::vector<BucketObservation> obs(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    auto& o = obs[i];
    o.event = cohort.event(i);
    o.cif_terminal = bundle.terminal(i, k);
    if (!(o.cif_terminal > 0.0))
      throw ValidationError("sample " + cohort.ids()[i] + ": terminal CIF for event " +
                            std::to_string(k) + " is zero");
    const auto j = bundle.grid().step_index(cohort.time(i));
    if (j < 0) {
      o.cif_at_time = 0.0;
      o.survival_at_time = 1.0;
    } else {
      o.cif_at_time = bundle.at(i, k, static_cast<std::size_t>(j));
      o.survival_at_time = bundle.survival_at(i, static_cast<std::size_t>(j));
    }
    // A censored sample whose event-k mass is exhausted contributes nothing;
    // otherwise its adjustment divides by the predicted survival.
    if (o.event == 0 && o.survival_at_time <= kSurvivalFloor &&
        o.cif_terminal - o.cif_at_time > kSurvivalFloor)
      throw NumericError("sample " + cohort.ids()[i] +
                         ": predicted survival vanishes at its censoring time");
  }
  return obs;
}

namespace {

double censored_adjustment(const BucketObservation& o, double rho) {
  if (o.survival_at_time <= kSurvivalFloor) return 0.0;
  return (o.cif_terminal * rho - o.cif_at_time) / o.survival_at_time;
}

double total_mass(const std::vector<BucketObservation>& obs) {
  double w = 0.0;
  for (const auto& o : obs) w += o.cif_terminal;
  return w;
}

double bucket_mass_with_total(const std::vector<BucketObservation>& obs, int k, double rho,
                              double w_total) {
  double count = 0.0;
  double censored = 0.0;
  for (const auto& o : obs) {
    const double r = o.ratio();
    if (r < 0.0 || r > rho) continue;
    if (o.event == k) {
      count += 1.0;
    } else if (o.event == 0) {
      censored += censored_adjustment(o, rho);
    }
  }
  return (count + censored) / w_total;
}

}  // namespace

double bucket_mass(const std::vector<BucketObservation>& obs, int k, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (obs.empty()) throw ValidationError("bucket mass needs at least one sample");
  return bucket_mass_with_total(obs, k, rho, total_mass(obs));
}

double bucket_mass(const CifBundle& bundle, const Cohort& cohort, int k, double rho) {
  return bucket_mass(bucket_observations(bundle, cohort, k), k, rho);
}

double interval_bucket(const std::vector<BucketObservation>& obs, int k, double a, double b) {
  if (!(a >= 0.0 && a < b && b <= 1.0))
    throw ValidationError("interval bucket needs 0 <= a < b <= 1");
  return bucket_mass(obs, k, b) - bucket_mass(obs, k, a);
}

double interval_bucket(const CifBundle& bundle, const Cohort& cohort, int k, double a, double b) {
  return interval_bucket(bucket_observations(bundle, cohort, k), k, a, b);
}

std::vector<double> bucket_deviations(const std::vector<BucketObservation>& obs, int k,
                                      std::size_t rho_steps) {
  if (obs.empty()) throw ValidationError("bucket deviations need at least one sample");
  const double w_total = total_mass(obs);
  const double m = static_cast<double>(rho_steps);
  std::vector<double> dev(rho_steps);
  for (std::size_t j = 1; j <= rho_steps; ++j) {
    const double rho = static_cast<double>(j) / m;
    dev[j - 1] = bucket_mass_with_total(obs, k, rho, w_total) - rho;
  }
  return dev;
}

double deviation_norm(const std::vector<double>& deviations, double alpha) {
  if (std::isinf(alpha)) {
    double sup = 0.0;
    for (double d : deviations) sup = std::max(sup, std::abs(d));
    return sup;
  }
  double integral = 0.0;
  const double m = static_cast<double>(deviations.size());
  for (double d : deviations) integral += std::pow(std::abs(d), alpha) / m;
  return std::pow(integral, 1.0 / alpha);
}

PerEventMetric cr_d_hat(const CifBundle& bundle, const Cohort& cohort, const MetricParams& params) {
  params.validate();
  PerEventMetric out;
  for (int k = 1; k <= cohort.k_events(); ++k) {
    const auto obs = bucket_observations(bundle, cohort, k);
    const double d = deviation_norm(bucket_deviations(obs, k, params.rho_steps), params.alpha);
    out.per_event[k] = d;
    out.total += d;
  }
  return out;
}

double mean_prediction(const CifBundle& bundle, int k, double tau) {
  if (bundle.size() == 0) throw ValidationError("empty bundle");
  const auto j = bundle.grid().step_index(tau);
  if (j < 0) return 0.0;
  double sum = 0.0;
  for (std::size_t s = 0; s < bundle.size(); ++s)
    sum += bundle.at(s, k, static_cast<std::size_t>(j));
  return sum / static_cast<double>(bundle.size());
}

double pi_cal_tau(const CifBundle& bundle, const MarginalCurveSet& marginal, int k, double tau) {
  if (!(tau >= 0.0) || tau > bundle.grid().t_max())
    throw ValidationError("tau lies beyond the prediction horizon");
  if (k < 1 || k > bundle.k_events()) throw ValidationError("event index out of range");
  return std::abs(marginal.cif(k).at(tau) - mean_prediction(bundle, k, tau));
}

PerEventMetric pi_cal_alpha(const CifBundle& bundle, const MarginalCurveSet& marginal,
                            const MetricParams& params, const TimeGrid& grid) {
  params.validate();
  if (grid.size() == 0) throw ValidationError("empty grid");
  PerEventMetric out;
  for (int k = 1; k <= bundle.k_events(); ++k) {
    double value = 0.0;
    if (std::isinf(params.alpha)) {
      for (double tau : grid.times()) value = std::max(value, pi_cal_tau(bundle, marginal, k, tau));
    } else {
      double integral = 0.0;
      double previous = 0.0;
      for (double tau : grid.times()) {
        integral += std::pow(pi_cal_tau(bundle, marginal, k, tau), params.alpha) * (tau - previous);
        previous = tau;
      }
      value = std::pow(integral, 1.0 / params.alpha);
    }
    out.per_event[k] = value;
    out.total += value;
  }
  return out;
}

}  // namespace crcal
