#pragma once

// Competing-risks calibration metrics: distribution calibration over
// normalized-CIF buckets, and plug-in marginal calibration against
// Aalen-Johansen curves.

#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "crcal/data_model.hpp"
#include "crcal/marginal.hpp"

namespace crcal {

inline constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

struct MetricParams {
  double alpha = 2.0;            // norm order, >= 1 or kInfiniteAlpha
  std::size_t rho_steps = 100;   // Riemann resolution over rho

  void validate() const;
};

// Everything the bucket estimator needs about one sample for one event.
struct BucketObservation {
  int event = 0;           // observed label, 0 = censored
  double cif_at_time = 0;  // F_k(t_i | x_i)
  double cif_terminal = 0; // F_k(t_max | x_i), the stand-in for F_k(inf | x_i)
  double survival_at_time = 1;  // S(t_i | x_i)

  double ratio() const { return cif_at_time / cif_terminal; }
};

inline constexpr double kSurvivalFloor = 1e-10;

// Per-sample inputs for event k, predictions stepped onto each observed time.
std::vector<BucketObservation> bucket_observations(const CifBundle& bundle, const Cohort& cohort,
                                                   int k);

// Normalized bucket mass b_[0, rho] for event k.
double bucket_mass(const std::vector<BucketObservation>& obs, int k, double rho);
double bucket_mass(const CifBundle& bundle, const Cohort& cohort, int k, double rho);

// b_[0, b] - b_[0, a], 0 <= a < b <= 1.
double interval_bucket(const std::vector<BucketObservation>& obs, int k, double a, double b);
double interval_bucket(const CifBundle& bundle, const Cohort& cohort, int k, double a, double b);

// Signed deviations b_[0, j/M] - j/M for j = 1..M.
std::vector<double> bucket_deviations(const std::vector<BucketObservation>& obs, int k,
                                      std::size_t rho_steps);

// Collapses deviations into the alpha-norm distance (sup norm for infinite alpha).
double deviation_norm(const std::vector<double>& deviations, double alpha);

struct PerEventMetric {
  std::map<int, double> per_event;
  double total = 0.0;
};

PerEventMetric cr_d_hat(const CifBundle& bundle, const Cohort& cohort, const MetricParams& params);

// Across-sample mean of F_k(tau | x).
double mean_prediction(const CifBundle& bundle, int k, double tau);

// |F_AJ^k(tau) - mean_i F_k(tau | x_i)|.
double pi_cal_tau(const CifBundle& bundle, const MarginalCurveSet& marginal, int k, double tau);

// Left Riemann sum over grid anchored at tau_0 = 0.
PerEventMetric pi_cal_alpha(const CifBundle& bundle, const MarginalCurveSet& marginal,
                            const MetricParams& params, const TimeGrid& grid);

}  // namespace crcal
