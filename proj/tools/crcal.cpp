// crcal: competing-risks calibration command-line tool.
//
//   crcal simulate    --n N --seed S --out DIR
//   crcal aj          --train F --predict F --out bundle.csv
//   crcal metrics     --cohort F --bundle F --out report.json
//   crcal recalibrate --method aj|ts --cal-cohort F --cal-bundle F --test-bundle F --out DIR
//   crcal evaluate    --cohort F --bundle F --out eval.json
//   crcal bench       --config bench.json --seeds K --out DIR
//
// Exit codes: 0 success, 2 validation error, 3 numeric / IPCW-domain error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include "CLI11.hpp"

#include "crcal/bench.hpp"
#include "crcal/errors.hpp"
#include "crcal/evaluation.hpp"
#include "crcal/marginal.hpp"
#include "crcal/parallel.hpp"
#include "crcal/recalibration.hpp"
#include "crcal/report.hpp"
#include "crcal/synthetic.hpp"

namespace fs = std::filesystem;
using namespace crcal;

namespace {

double parse_alpha(const std::string& text) {
  if (text == "inf" || text == "INFINITY") return kInfiniteAlpha;
  try {
    std::size_t used = 0;
    const double a = std::stod(text, &used);
    if (used != text.size()) throw ValidationError("");
    return a;
  } catch (const std::exception&) {
    throw ValidationError("alpha must be a number or 'inf'");
  }
}

void write_json(const std::string& path, const Json& json) { write_file(path, json.dump(2) + "\n"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration metrics, tests and recalibration for competing-risks predictions"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic Weibull cohort and its oracle CIFs");
  std::size_t sim_n = 1000;
  std::uint64_t seed = 1;
  std::size_t grid_size = 64;
  std::string out;
  bool no_censoring = false;
  simulate->add_option("--n", sim_n, "Cohort size")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--grid-size", grid_size, "Quantile grid size for the oracle bundle");
  simulate->add_flag("--no-censoring", no_censoring, "Disable censoring");
  simulate->add_option("--out", out, "Output directory")->required();

  // aj
  auto* aj = app.add_subcommand("aj", "Fit Aalen-Johansen on a cohort and emit it as a prediction bundle");
  std::string train_path, predict_path, grid_from;
  int k_events = 3;
  std::string curves_path;
  aj->add_option("--train", train_path, "Cohort CSV to fit on")->required();
  aj->add_option("--predict", predict_path, "Cohort CSV whose ids receive predictions")->required();
  aj->add_option("--grid-from", grid_from, "Cohort CSV whose duration quantiles form the grid (default: train)");
  aj->add_option("--grid-size", grid_size, "Grid size");
  aj->add_option("--k", k_events, "Number of competing events");
  aj->add_option("--curves", curves_path, "Optional CSV of the fitted marginal curves");
  aj->add_option("--out", out, "Bundle CSV to write")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Calibration metrics and KS tests");
  std::string cohort_path, bundle_path, alpha_text = "2";
  std::size_t rho_steps = 100;
  double level = 0.05;
  std::optional<std::uint64_t> report_seed;
  metrics->add_option("--cohort", cohort_path, "Cohort CSV")->required();
  metrics->add_option("--bundle", bundle_path, "Bundle CSV")->required();
  metrics->add_option("--k", k_events, "Number of competing events");
  metrics->add_option("--alpha", alpha_text, "Norm order (>= 1 or 'inf')");
  metrics->add_option("--rho-steps", rho_steps, "Riemann resolution over rho");
  metrics->add_option("--level", level, "Test level");
  metrics->add_option("--seed", report_seed, "Seed recorded in the report");
  metrics->add_option("--out", out, "Report JSON to write")->required();

  // recalibrate
  auto* recal = app.add_subcommand("recalibrate", "Fit a recalibration map and apply it to a test bundle");
  std::string method_text, cal_cohort_path, cal_bundle_path, test_bundle_path;
  recal->add_option("--method", method_text, "aj or ts")->required();
  recal->add_option("--cal-cohort", cal_cohort_path, "Calibration cohort CSV")->required();
  recal->add_option("--cal-bundle", cal_bundle_path, "Calibration bundle CSV")->required();
  recal->add_option("--test-bundle", test_bundle_path, "Bundle CSV to recalibrate")->required();
  recal->add_option("--grid-size", grid_size, "Quantile grid size");
  recal->add_option("--k", k_events, "Number of competing events");
  recal->add_option("--out", out, "Output directory")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "C-index, Brier score and IBS");
  eval->add_option("--cohort", cohort_path, "Cohort CSV")->required();
  eval->add_option("--bundle", bundle_path, "Bundle CSV")->required();
  eval->add_option("--k", k_events, "Number of competing events");
  eval->add_option("--curves", curves_path, "Optional mean-incidence CSV");
  eval->add_option("--out", out, "Evaluation JSON to write")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Multi-seed split/fit/recalibrate/score benchmark");
  std::string config_path;
  std::size_t seed_count = 5;
  bench->add_option("--config", config_path, "Benchmark JSON config")->required();
  bench->add_option("--seeds", seed_count, "Number of seeds")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "First seed");
  bench->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    set_thread_count(threads);

    if (*simulate) {
      WeibullConfig config;
      if (no_censoring) config.censoring_scale = std::numeric_limits<double>::infinity();
      const auto synthetic = generate_cohort(config, sim_n, seed);
      fs::create_directories(out);
      const auto grid = oracle_grid(synthetic.cohort, synthetic.latents, grid_size);
      write_file(out + "/cohort.csv", serialize_cohort(synthetic.cohort));
      write_file(out + "/oracle_bundle.csv",
                 serialize_bundle(oracle_bundle(synthetic.latents, synthetic.cohort.ids(), grid)));
      write_file(out + "/latents.csv", serialize_latents(synthetic.latents, synthetic.cohort.ids()));
      std::cout << "wrote " << synthetic.cohort.size() << " records (censoring scale "
                << synthetic.censoring_scale << ") to " << out << "\n";
    } else if (*aj) {
      const auto train = parse_cohort(read_file(train_path), k_events);
      const auto predict = parse_cohort(read_file(predict_path), k_events);
      const auto grid_cohort = grid_from.empty() ? train : parse_cohort(read_file(grid_from), k_events);
      const auto marginal = aalen_johansen(train);
      const auto bundle = replicate_marginal(marginal, quantile_grid(grid_cohort, grid_size), predict.ids());
      write_file(out, serialize_bundle(bundle));
      if (!curves_path.empty()) {
        std::string csv = "curve,time,value\n";
        auto append = [&](const std::string& name, const StepCurve& c) {
          csv += name + ",0," + format_double(c.initial_value) + "\n";
          for (std::size_t j = 0; j < c.jump_times.size(); ++j)
            csv += name + "," + format_double(c.jump_times[j]) + "," + format_double(c.values[j]) + "\n";
        };
        append("km", marginal.km_survival);
        for (int k = 1; k <= k_events; ++k) append("aj_" + std::to_string(k), marginal.cif(k));
        append("censoring", marginal.censoring_survival);
        write_file(curves_path, csv);
      }
    } else if (*metrics) {
      const auto cohort = parse_cohort(read_file(cohort_path), k_events);
      const auto bundle = parse_bundle(read_file(bundle_path), k_events).select(cohort.ids());
      MetricParams params{parse_alpha(alpha_text), rho_steps};
      const auto report = calibration_report(bundle, cohort, params, level, report_seed);
      write_json(out, to_json(report));
      std::cout << "d_cal total " << report.d_cal.total << ", pi_cal total " << report.pi_cal.total
                << "\n";
    } else if (*recal) {
      const auto method = parse_method(method_text);
      const auto cal_cohort = parse_cohort(read_file(cal_cohort_path), k_events);
      const auto cal_bundle = parse_bundle(read_file(cal_bundle_path), k_events).select(cal_cohort.ids());
      const auto test_bundle = parse_bundle(read_file(test_bundle_path), k_events);
      // Grid times past the calibration predictions cannot be fitted.
      const auto quantiles = quantile_grid(cal_cohort, grid_size);
      std::vector<double> times;
      for (double t : quantiles.times())
        if (t <= cal_bundle.grid().t_max()) times.push_back(t);
      const TimeGrid grid(std::move(times));
      auto map = method == RecalibrationMethod::AjOffset ? fit_aj_offsets(cal_cohort, cal_bundle, grid)
                                                         : fit_temperature(cal_cohort, cal_bundle, grid);
      auto result = method == RecalibrationMethod::AjOffset ? apply_offsets(test_bundle, map)
                                                            : apply_temperature(test_bundle, map);
      map.clip_events = result.clip_events;
      fs::create_directories(out);
      write_json(out + "/map.json", to_json(map));
      write_file(out + "/recalibrated_bundle.csv", serialize_bundle(result.bundle));
      std::cout << "clip events: " << result.clip_events << "\n";
    } else if (*eval) {
      const auto cohort = parse_cohort(read_file(cohort_path), k_events);
      const auto bundle = parse_bundle(read_file(bundle_path), k_events).select(cohort.ids());
      const auto result = evaluate(cohort, bundle);
      Json doc;
      doc["evaluation"] = to_json(result);
      write_json(out, doc);
      if (!curves_path.empty()) write_file(curves_path, serialize_mean_incidence(bundle));
      std::cout << "ibs " << result.ibs << "\n";
    } else if (*bench) {
      const auto config = BenchConfig::from_json(Json::parse(read_file(config_path)));
      std::vector<std::uint64_t> seeds;
      for (std::size_t s = 0; s < seed_count; ++s) seeds.push_back(seed + s);
      const auto summary = run_benchmark(config, seeds, out);
      std::cout << "wrote " << summary.rows.size() << " summary rows to " << out << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
