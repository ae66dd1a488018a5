#pragma once

// Post-hoc recalibration of CIF bundles against Aalen-Johansen marginals of a
// calibration cohort: additive per-time offsets, and per-time temperature
// scaling of the (survival, event 1..K) probability vector.

#include <cstddef>
#include <string>
#include <vector>

#include "crcal/data_model.hpp"

namespace crcal {

enum class RecalibrationMethod { AjOffset, Temperature };

std::string to_string(RecalibrationMethod method);
RecalibrationMethod parse_method(const std::string& text);

struct RecalibrationMap {
  RecalibrationMethod method = RecalibrationMethod::AjOffset;
  TimeGrid grid;
  int k_events = 1;
  // AjOffset: (K + 1) x grid, row 0 is the survival pseudo-event.
  std::vector<double> offsets;
  // Temperature: one positive value per grid time.
  std::vector<double> temperatures;
  std::size_t clip_events = 0;

  double offset(int k, std::size_t j) const {
    return offsets[static_cast<std::size_t>(k) * grid.size() + j];
  }
};

struct RecalibratedBundle {
  CifBundle bundle;
  std::size_t clip_events = 0;
};

RecalibrationMap fit_aj_offsets(const Cohort& cal_cohort, const CifBundle& cal_bundle,
                                const TimeGrid& grid);

// Adds the offsets, then repairs infeasible values: clip to [0, 1], running
// maximum per curve, and a proportional shrink of the increments when the
// event total would exceed one. A terminal value clipped to zero is raised to
// kTerminalFloor. Every altered value counts as a clip event.
RecalibratedBundle apply_offsets(const CifBundle& bundle, const RecalibrationMap& map);

inline constexpr double kTerminalFloor = 1e-12;
inline constexpr double kTemperatureEpsilon = 1e-12;
inline constexpr double kTemperatureMin = 1e-3;
inline constexpr double kTemperatureMax = 1e3;
inline constexpr int kTemperatureScanPoints = 61;
inline constexpr double kTemperatureTolerance = 1e-6;

// Power-normalization (p_c + eps)^beta / sum_c (p_c + eps)^beta.
std::vector<double> power_normalize(const std::vector<double>& probabilities, double beta);

// Minimizes the summed absolute marginal gap at one time over beta > 0.
// log_probs holds log(p_c + eps) for every sample, row-major samples x (K + 1);
// targets holds the marginal incidence of events 1..K.
double fit_temperature_at(const std::vector<double>& log_probs, std::size_t classes,
                          const std::vector<double>& targets);

RecalibrationMap fit_temperature(const Cohort& cal_cohort, const CifBundle& cal_bundle,
                                 const TimeGrid& grid);

RecalibratedBundle apply_temperature(const CifBundle& bundle, const RecalibrationMap& map);

struct PredictiveBound {
  double time = 0.0;
  bool open = false;  // threshold only reached at the horizon itself
};

// Smallest grid time where F_k(tau | x) / F_k(t_max | x) >= 1 - gamma.
std::vector<PredictiveBound> upper_predictive_bound(const CifBundle& bundle, int k, double gamma);

}  // namespace crcal
