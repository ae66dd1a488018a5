#include "crcal/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "crcal/errors.hpp"
#include "crcal/marginal.hpp"
#include "crcal/synthetic.hpp"

namespace crcal {

namespace fs = std::filesystem;

BenchConfig BenchConfig::from_json(const Json& json) {
  BenchConfig c;
  try {
    if (json.contains("data")) {
      const auto& data = json.at("data");
      c.source = data.value("source", c.source);
      c.n = data.value("n", c.n);
      c.cohort_path = data.value("path", c.cohort_path);
      c.k_events = data.value("k_events", c.k_events);
    }
    if (json.contains("models")) c.models = json.at("models").get<std::vector<std::string>>();
    if (json.contains("methods")) c.methods = json.at("methods").get<std::vector<std::string>>();
    if (json.contains("external_models")) {
      for (const auto& m : json.at("external_models"))
        c.external_models.push_back({m.at("name").get<std::string>(),
                                     m.at("cal_bundle").get<std::string>(),
                                     m.at("test_bundle").get<std::string>()});
    }
    c.grid_size = json.value("grid_size", c.grid_size);
    if (json.contains("alpha")) {
      const auto& a = json.at("alpha");
      c.params.alpha = a.is_string() && a.get<std::string>() == "inf" ? kInfiniteAlpha
                                                                     : a.get<double>();
    }
    c.params.rho_steps = json.value("rho_steps", c.params.rho_steps);
    c.level = json.value("level", c.level);
    if (json.contains("fractions")) {
      const auto f = json.at("fractions").get<std::vector<double>>();
      if (f.size() != 3) throw ValidationError("fractions must have three entries");
      c.fractions = {f[0], f[1], f[2]};
    }
    c.evaluate = json.value("evaluate", c.evaluate);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed bench config: ") + e.what());
  }
  if (c.source != "synthetic" && c.source != "csv")
    throw ValidationError("data source must be 'synthetic' or 'csv'");
  if (c.source == "csv" && c.cohort_path.empty())
    throw ValidationError("csv data source needs a path");
  for (const auto& m : c.models) {
    if (m != "aj" && m != "oracle" && m != "distorted_oracle")
      throw ValidationError("unknown built-in model '" + m + "'");
    if (m != "aj" && c.source != "synthetic")
      throw ValidationError("model '" + m + "' is only available for synthetic data");
  }
  for (const auto& m : c.methods)
    if (m != "base" && m != "aj" && m != "ts") throw ValidationError("unknown method '" + m + "'");
  c.params.validate();
  return c;
}

Json BenchConfig::to_json() const {
  Json out;
  out["data"] = Json{{"source", source}, {"n", n}, {"path", cohort_path}, {"k_events", k_events}};
  out["models"] = models;
  Json ext = Json::array();
  for (const auto& m : external_models)
    ext.push_back(Json{{"name", m.name}, {"cal_bundle", m.cal_bundle}, {"test_bundle", m.test_bundle}});
  out["external_models"] = ext;
  out["methods"] = methods;
  out["grid_size"] = grid_size;
  out["alpha"] = std::isinf(params.alpha) ? Json("inf") : Json(params.alpha);
  out["rho_steps"] = params.rho_steps;
  out["level"] = level;
  out["fractions"] = fractions;
  out["evaluate"] = evaluate;
  return out;
}

const SummaryRow& BenchSummary::row(const std::string& model, const std::string& method,
                                    const std::string& metric) const {
  for (const auto& r : rows)
    if (r.model == model && r.method == method && r.metric == metric) return r;
  throw ValidationError("no summary row for " + model + "/" + method + "/" + metric);
}

namespace {

std::string substitute_seed(std::string path, std::uint64_t seed) {
  const std::string key = "{seed}";
  for (auto pos = path.find(key); pos != std::string::npos; pos = path.find(key))
    path.replace(pos, key.size(), std::to_string(seed));
  return path;
}

std::string id_list(const Cohort& cohort) {
  std::string out = "id\n";
  for (const auto& id : cohort.ids()) out += id + "\n";
  return out;
}

struct ModelBundles {
  std::string name;
  CifBundle cal;
  CifBundle test;
};

std::vector<LatentRecord> pick(const std::vector<LatentRecord>& latents,
                               const std::vector<std::size_t>& rows) {
  std::vector<LatentRecord> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(latents[r]);
  return out;
}

// Ordered (model, method) -> metric -> value for one seed.
using SeedMetrics = std::vector<std::tuple<std::string, std::string, std::string, double>>;

void add_report_metrics(SeedMetrics& out, const std::string& model, const std::string& method,
                        const CalibrationReport& report, const std::optional<EvaluationResult>& eval,
                        std::size_t clip_events) {
  out.emplace_back(model, method, "d_cal_total", report.d_cal.total);
  for (const auto& [k, v] : report.d_cal.per_event)
    out.emplace_back(model, method, "d_cal_event_" + std::to_string(k), v);
  out.emplace_back(model, method, "pi_cal_total", report.pi_cal.total);
  for (const auto& [k, v] : report.pi_cal.per_event)
    out.emplace_back(model, method, "pi_cal_event_" + std::to_string(k), v);
  out.emplace_back(model, method, "d_cal_test_passed", report.d_cal_test.overall_passed ? 1.0 : 0.0);
  out.emplace_back(model, method, "pi_cal_test_passed",
                   report.pi_cal_test.overall_passed ? 1.0 : 0.0);
  if (eval) {
    out.emplace_back(model, method, "ibs", eval->ibs);
    out.emplace_back(model, method, "mean_c_index",
                     eval->mean_c_index ? *eval->mean_c_index : std::nan(""));
  }
  out.emplace_back(model, method, "clip_events", static_cast<double>(clip_events));
}

}  // namespace

BenchSummary run_benchmark(const BenchConfig& config, const std::vector<std::uint64_t>& seeds,
                           const std::string& out_dir) {
  if (seeds.empty()) throw ValidationError("benchmark needs at least one seed");
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);

  std::optional<Cohort> csv_cohort;
  if (config.source == "csv") csv_cohort = parse_cohort(read_file(config.cohort_path), config.k_events);

  std::vector<SeedMetrics> per_seed;
  for (const auto seed : seeds) {
    const std::string seed_dir = write ? out_dir + "/seed_" + std::to_string(seed) : "";
    if (write) fs::create_directories(seed_dir);

    Cohort cohort;
    std::vector<LatentRecord> latents;
    if (csv_cohort) {
      cohort = *csv_cohort;
    } else {
      auto synthetic = generate_cohort(WeibullConfig{}, config.n, seed);
      cohort = std::move(synthetic.cohort);
      latents = std::move(synthetic.latents);
    }
    const auto split = split_cohort(cohort, seed, config.fractions);
    const TimeGrid grid = quantile_grid(split.calibration, config.grid_size);

    // Fitting below only ever reads train and calibration records.
    std::vector<ModelBundles> models;
    for (const auto& name : config.models) {
      if (name == "aj") {
        const auto marginal = aalen_johansen(split.train);
        models.push_back({name, replicate_marginal(marginal, grid, split.calibration.ids()),
                          replicate_marginal(marginal, grid, split.test.ids())});
      } else {
        // Extend to the survival horizon so terminal values stand in for F_k(infinity | x).
        auto times = grid.times();
        double proxy = 0.0;
        for (const auto& r : latents) proxy = std::max(proxy, horizon_proxy(r));
        if (proxy > times.back()) times.push_back(proxy);
        const TimeGrid oracle_times(std::move(times));
        auto cal = oracle_bundle(pick(latents, split.rows[1]), split.calibration.ids(), oracle_times);
        auto test = oracle_bundle(pick(latents, split.rows[2]), split.test.ids(), oracle_times);
        if (name == "distorted_oracle") {
          cal = square_distort(cal);
          test = square_distort(test);
        }
        models.push_back({name, std::move(cal), std::move(test)});
      }
    }
    for (const auto& ext : config.external_models) {
      const int k = cohort.k_events();
      auto cal = parse_bundle(read_file(substitute_seed(ext.cal_bundle, seed)), k)
                     .select(split.calibration.ids());
      auto test =
          parse_bundle(read_file(substitute_seed(ext.test_bundle, seed)), k).select(split.test.ids());
      models.push_back({ext.name, std::move(cal), std::move(test)});
    }

    if (write) {
      write_file(seed_dir + "/train_ids.csv", id_list(split.train));
      write_file(seed_dir + "/cal_ids.csv", id_list(split.calibration));
      write_file(seed_dir + "/test_ids.csv", id_list(split.test));
      std::set<std::string> seen;
      bool disjoint = true;
      for (const auto* part : {&split.train, &split.calibration, &split.test})
        for (const auto& id : part->ids()) disjoint = seen.insert(id).second && disjoint;
      Json audit{{"seed", seed},
                 {"train", split.train.size()},
                 {"calibration", split.calibration.size()},
                 {"test", split.test.size()},
                 {"disjoint", disjoint},
                 {"fit_uses", Json::array({"train", "calibration"})},
                 {"grid", grid.times()}};
      write_file(seed_dir + "/splits.json", audit.dump(2) + "\n");
    }

    // Recalibration maps live on each model's own grid so base and recalibrated
    // bundles are scored over the same time range.
    SeedMetrics metrics;
    for (const auto& model : models) {
      for (const auto& method : config.methods) {
        CifBundle scored = model.test;
        std::size_t clips = 0;
        std::optional<RecalibrationMap> map;
        if (method == "aj") {
          map = fit_aj_offsets(split.calibration, model.cal, model.cal.grid());
          auto out = apply_offsets(model.test, *map);
          scored = std::move(out.bundle);
          clips = map->clip_events = out.clip_events;
        } else if (method == "ts") {
          map = fit_temperature(split.calibration, model.cal, model.cal.grid());
          auto out = apply_temperature(model.test, *map);
          scored = std::move(out.bundle);
          clips = map->clip_events = out.clip_events;
        }
        const auto report = calibration_report(scored, split.test, config.params, config.level, seed);
        std::optional<EvaluationResult> eval;
        if (config.evaluate) eval = evaluate(split.test, scored);
        add_report_metrics(metrics, model.name, method, report, eval, clips);
        if (write) {
          Json doc{{"model", model.name}, {"method", method}, {"clip_events", clips}};
          doc["calibration"] = to_json(report);
          if (eval) doc["evaluation"] = to_json(*eval);
          const std::string stem = seed_dir + "/" + model.name + "_" + method;
          write_file(stem + ".json", doc.dump(2) + "\n");
          if (map) write_file(stem + "_map.json", to_json(*map).dump(2) + "\n");
        }
      }
    }
    per_seed.push_back(std::move(metrics));
  }

  BenchSummary summary;
  summary.seeds = seeds;
  for (std::size_t r = 0; r < per_seed.front().size(); ++r) {
    SummaryRow row;
    std::tie(row.model, row.method, row.metric, std::ignore) = per_seed.front()[r];
    for (const auto& seed_metrics : per_seed) row.values.push_back(std::get<3>(seed_metrics.at(r)));
    const double n = static_cast<double>(row.values.size());
    for (double v : row.values) row.mean += v / n;
    if (row.values.size() > 1) {
      double ss = 0.0;
      for (double v : row.values) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / (n - 1.0));
    }
    summary.rows.push_back(std::move(row));
  }

  if (write) {
    Json doc = to_json(summary);
    doc["config"] = config.to_json();
    write_file(out_dir + "/summary.json", doc.dump(2) + "\n");
    write_file(out_dir + "/summary.csv", summary_csv(summary));
  }
  return summary;
}

Json to_json(const BenchSummary& summary) {
  Json out;
  out["seeds"] = summary.seeds;
  Json rows = Json::array();
  for (const auto& r : summary.rows)
    rows.push_back(Json{{"model", r.model},
                        {"method", r.method},
                        {"metric", r.metric},
                        {"mean", r.mean},
                        {"std", r.std},
                        {"values", r.values}});
  out["rows"] = rows;
  return out;
}

std::string summary_csv(const BenchSummary& summary) {
  std::string out = "model,method,metric,mean,std\n";
  for (const auto& r : summary.rows)
    out += r.model + "," + r.method + "," + r.metric + "," + format_double(r.mean) + "," +
           format_double(r.std) + "\n";
  return out;
}

}  // namespace crcal
