#pragma once

// Population-level estimators: Kaplan-Meier survival, Aalen-Johansen
// cumulative incidences and the censoring survival used for IPCW weights.

#include <string>
#include <vector>

#include "crcal/data_model.hpp"

namespace crcal {

// Right-continuous step function. Evaluates to initial_value before the first
// jump time.
struct StepCurve {
  std::vector<double> jump_times;
  std::vector<double> values;
  double initial_value = 0.0;

  double at(double t) const;
  // Limit from the left, value at t-.
  double left_limit(double t) const;
};

struct MarginalCurveSet {
  std::vector<double> event_times;
  StepCurve km_survival;
  std::vector<StepCurve> aj_cif;  // index k-1
  StepCurve censoring_survival;

  const StepCurve& cif(int k) const { return aj_cif.at(static_cast<std::size_t>(k - 1)); }
};

StepCurve kaplan_meier(const Cohort& cohort);

// Kaplan-Meier with roles flipped: censoring is the event. At tied times the
// censorings are removed after the events at that time.
StepCurve censoring_survival(const Cohort& cohort);

MarginalCurveSet aalen_johansen(const Cohort& cohort);

// Every sample receives the marginal AJ curves evaluated on grid.
CifBundle replicate_marginal(const MarginalCurveSet& marginal, const TimeGrid& grid,
                             std::vector<std::string> sample_ids);

// CSV "time,value" with the initial value as a row at time 0.
std::string serialize_step_curve(const StepCurve& curve);

}  // namespace crcal
