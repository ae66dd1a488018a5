#pragma once

// Discrimination and accuracy metrics for competing-risks predictions:
// IPCW concordance, IPCW Brier score, its time integral, and mean incidence
// curves.

#include <optional>
#include <vector>

#include "crcal/data_model.hpp"
#include "crcal/marginal.hpp"

namespace crcal {

// Concordance at horizon tau for event k. Empty when no pair is comparable.
std::optional<double> cr_c_index(const Cohort& cohort, const CifBundle& bundle, int k, double tau,
                                 const StepCurve& censoring);

double brier_score(const Cohort& cohort, const CifBundle& bundle, int k, double tau,
                   const StepCurve& censoring);

// Mean over events of (1 / t_max) * sum_j BS_k(tau_j) (tau_j - tau_{j-1}), tau_0 = 0.
double integrated_brier(const Cohort& cohort, const CifBundle& bundle, const TimeGrid& grid,
                        const StepCurve& censoring);

// Grid times where the censoring survival is still positive.
TimeGrid ipcw_valid_grid(const TimeGrid& grid, const StepCurve& censoring);

// [k-1][j] across-sample mean of F_k(tau_j | x) on the bundle grid.
std::vector<std::vector<double>> mean_incidence(const CifBundle& bundle);

// Horizons at the 25/50/75% lower-interpolation duration quantiles.
std::vector<double> default_horizons(const Cohort& cohort);

struct CIndexEntry {
  int event = 0;
  double horizon = 0.0;
  std::optional<double> value;
};

struct BrierEntry {
  int event = 0;
  double time = 0.0;
  double value = 0.0;
};

struct EvaluationResult {
  std::vector<CIndexEntry> c_index;
  std::optional<double> mean_c_index;
  std::vector<BrierEntry> brier;
  double ibs = 0.0;
  TimeGrid ibs_grid;
  std::vector<std::vector<double>> mean_curves;
};

EvaluationResult evaluate(const Cohort& cohort, const CifBundle& bundle);

// CSV "event,time,mean_cif".
std::string serialize_mean_incidence(const CifBundle& bundle);

}  // namespace crcal
