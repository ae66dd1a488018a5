#pragma once

// Report assembly and JSON serialization with a stable key order.

#include <cstdint>
#include <optional>

#include "json.hpp"

#include "crcal/calibration.hpp"
#include "crcal/evaluation.hpp"
#include "crcal/hypothesis.hpp"
#include "crcal/recalibration.hpp"

namespace crcal {

using Json = nlohmann::ordered_json;

struct CalibrationReport {
  MetricParams params;
  double level = 0.05;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  PerEventMetric d_cal;
  PerEventMetric pi_cal;
  TestSuite d_cal_test;
  TestSuite pi_cal_test;
};

// Scores bundle against cohort; the plug-in marginal is the Aalen-Johansen fit
// on the same cohort and the plug-in integral runs over the bundle grid.
CalibrationReport calibration_report(const CifBundle& bundle, const Cohort& cohort,
                                     const MetricParams& params, double level,
                                     std::optional<std::uint64_t> seed = std::nullopt);

Json to_json(const CalibrationReport& report);
Json to_json(const TestSuite& suite);
Json to_json(const EvaluationResult& result);
Json to_json(const RecalibrationMap& map);
RecalibrationMap recalibration_map_from_json(const Json& json);

}  // namespace crcal
