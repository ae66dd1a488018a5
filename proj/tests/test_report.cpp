#include <cmath>

#include "crcal/bench.hpp"
#include "crcal/errors.hpp"
#include "crcal/marginal.hpp"
#include "crcal/parallel.hpp"
#include "crcal/report.hpp"
#include "crcal/synthetic.hpp"
#include "doctest.h"

using namespace crcal;

TEST_CASE("report layout") {
  const auto s = generate_cohort(WeibullConfig{}, 400, 2);
  const auto b = oracle_bundle(s.latents, s.cohort.ids(), oracle_grid(s.cohort, s.latents, 16));
  const auto report = calibration_report(b, s.cohort, MetricParams{kInfiniteAlpha, 50}, 0.05, 2);
  const auto json = to_json(report);
  std::vector<std::string> keys;
  for (const auto& [key, value] : json.items()) keys.push_back(key);
  CHECK(keys == std::vector<std::string>{"params", "n", "seed", "d_cal", "pi_cal", "tests"});
  CHECK(json["params"]["alpha"] == "inf");
  CHECK(json["seed"] == 2);
  CHECK(json["tests"]["d_cal"]["1"].contains("D"));
  CHECK(json["tests"]["d_cal"]["1"]["D"].get<double>() == json["d_cal"]["per_event"]["1"].get<double>());
  CHECK(json["tests"]["pi_cal"].contains("overall_passed"));
}

TEST_SUITE("bench") {
  TEST_CASE("config parsing") {
    const auto c = BenchConfig::from_json(Json::parse(
        R"({"data":{"source":"synthetic","n":300},"models":["aj","oracle"],"alpha":"inf","rho_steps":20})"));
    CHECK(c.n == 300);
    CHECK(std::isinf(c.params.alpha));
    CHECK(c.models.size() == 2);
    CHECK_THROWS_AS(BenchConfig::from_json(Json::parse(R"({"models":["forest"]})")), ValidationError);
    CHECK_THROWS_AS(BenchConfig::from_json(Json::parse(R"({"methods":["xx"]})")), ValidationError);
    CHECK_THROWS_AS(BenchConfig::from_json(Json::parse(R"({"data":{"source":"csv"}})")),
                    ValidationError);
    CHECK_THROWS_AS(BenchConfig::from_json(Json::parse(R"({"fractions":[0.5,0.5]})")),
                    ValidationError);
  }

  TEST_CASE("summary aggregates per-seed values") {
    BenchConfig config;
    config.n = 800;
    config.models = {"aj", "distorted_oracle"};
    config.grid_size = 16;
    const auto summary = run_benchmark(config, {3, 4, 5}, "");
    for (const auto& row : summary.rows) {
      REQUIRE(row.values.size() == 3);
      double mean = 0.0;
      for (double v : row.values) mean += v / 3.0;
      CHECK(row.mean == doctest::Approx(mean).epsilon(1e-14));
      double ss = 0.0;
      for (double v : row.values) ss += (v - row.mean) * (v - row.mean);
      CHECK(row.std == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12).scale(1.0));
    }
    CHECK(summary.row("aj", "base", "pi_cal_total").mean < 0.1);
    CHECK(summary.row("distorted_oracle", "aj", "pi_cal_total").mean <
          summary.row("distorted_oracle", "base", "pi_cal_total").mean);
    CHECK_THROWS_AS(summary.row("x", "y", "z"), ValidationError);
    const auto csv = summary_csv(summary);
    CHECK(csv.rfind("model,method,metric,mean,std\n", 0) == 0);
  }

  TEST_CASE("thread count does not change results") {
    BenchConfig config;
    config.n = 600;
    config.models = {"aj", "oracle"};
    config.grid_size = 12;
    set_thread_count(1);
    const auto one = to_json(run_benchmark(config, {8}, "")).dump();
    set_thread_count(4);
    const auto four = to_json(run_benchmark(config, {8}, "")).dump();
    set_thread_count(1);
    CHECK(one == four);
  }
}
