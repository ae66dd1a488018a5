#include "crcal/report.hpp"

#include <cmath>

#include "crcal/errors.hpp"

namespace crcal {

CalibrationReport calibration_report(const CifBundle& bundle, const Cohort& cohort,
                                     const MetricParams& params, double level,
                                     std::optional<std::uint64_t> seed) {
  require_aligned(bundle, cohort);
  const auto marginal = aalen_johansen(cohort);
  CalibrationReport report;
  report.params = params;
  report.level = level;
  report.n = cohort.size();
  report.seed = seed;
  report.d_cal = cr_d_hat(bundle, cohort, params);
  report.pi_cal = pi_cal_alpha(bundle, marginal, params, bundle.grid());
  report.d_cal_test = d_cal_test(bundle, cohort, level, params.rho_steps);
  report.pi_cal_test = pi_cal_test(bundle, marginal, cohort, level);
  return report;
}

namespace {

Json alpha_json(double alpha) { return std::isinf(alpha) ? Json("inf") : Json(alpha); }

Json metric_json(const PerEventMetric& metric) {
  Json per_event = Json::object();
  for (const auto& [k, v] : metric.per_event) per_event[std::to_string(k)] = v;
  return Json{{"per_event", per_event}, {"total", metric.total}};
}

Json optional_json(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace

Json to_json(const TestSuite& suite) {
  Json out = Json::object();
  for (const auto& [k, r] : suite.per_event) {
    if (!r.testable) {
      out[std::to_string(k)] = Json{{"testable", false}};
      continue;
    }
    out[std::to_string(k)] = Json{
        {"D", r.statistic}, {"n", r.n_effective}, {"p", r.p_value}, {"passed", r.passed}};
  }
  out["level"] = suite.level;
  out["threshold"] = suite.threshold;
  out["overall_passed"] = suite.overall_passed;
  out["alt_threshold"] = suite.alt_threshold;
  out["overall_passed_alt"] = suite.overall_passed_alt;
  out["warnings"] = suite.warnings;
  return out;
}

Json to_json(const CalibrationReport& report) {
  Json out;
  out["params"] = Json{{"alpha", alpha_json(report.params.alpha)},
                       {"rho_steps", report.params.rho_steps},
                       {"level", report.level}};
  out["n"] = report.n;
  out["seed"] = report.seed ? Json(*report.seed) : Json(nullptr);
  out["d_cal"] = metric_json(report.d_cal);
  out["pi_cal"] = metric_json(report.pi_cal);
  out["tests"] = Json{{"d_cal", to_json(report.d_cal_test)},
                      {"pi_cal", to_json(report.pi_cal_test)}};
  return out;
}

Json to_json(const EvaluationResult& result) {
  Json out;
  Json c_index = Json::array();
  for (const auto& e : result.c_index)
    c_index.push_back(
        Json{{"event", e.event}, {"horizon", e.horizon}, {"value", optional_json(e.value)}});
  out["c_index"] = c_index;
  out["mean_c_index"] = optional_json(result.mean_c_index);
  out["ibs"] = result.ibs;
  out["ibs_horizon"] = result.ibs_grid.t_max();
  Json brier = Json::array();
  for (const auto& b : result.brier)
    brier.push_back(Json{{"event", b.event}, {"time", b.time}, {"value", b.value}});
  out["brier"] = brier;
  return out;
}

Json to_json(const RecalibrationMap& map) {
  Json out;
  out["method"] = to_string(map.method);
  out["k_events"] = map.k_events;
  out["grid"] = map.grid.times();
  if (map.method == RecalibrationMethod::AjOffset) {
    Json offsets = Json::object();
    for (int k = 0; k <= map.k_events; ++k) {
      std::vector<double> row;
      for (std::size_t j = 0; j < map.grid.size(); ++j) row.push_back(map.offset(k, j));
      offsets[std::to_string(k)] = row;
    }
    out["offsets"] = offsets;
  } else {
    out["temperatures"] = map.temperatures;
  }
  out["clip_events"] = map.clip_events;
  return out;
}

RecalibrationMap recalibration_map_from_json(const Json& json) {
  try {
    RecalibrationMap map;
    map.method = parse_method(json.at("method").get<std::string>());
    map.k_events = json.at("k_events").get<int>();
    map.grid = TimeGrid(json.at("grid").get<std::vector<double>>());
    map.clip_events = json.value("clip_events", std::size_t{0});
    if (map.method == RecalibrationMethod::AjOffset) {
      for (int k = 0; k <= map.k_events; ++k) {
        auto row = json.at("offsets").at(std::to_string(k)).get<std::vector<double>>();
        if (row.size() != map.grid.size()) throw ValidationError("offset row length mismatch");
        map.offsets.insert(map.offsets.end(), row.begin(), row.end());
      }
    } else {
      map.temperatures = json.at("temperatures").get<std::vector<double>>();
      if (map.temperatures.size() != map.grid.size())
        throw ValidationError("temperature count does not match the grid");
      for (double b : map.temperatures)
        if (!(b > 0.0)) throw ValidationError("temperatures must be positive");
    }
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed recalibration map: ") + e.what());
  }
}

}  // namespace crcal
