#pragma once

// Multi-seed benchmark: split, fit, recalibrate, score and aggregate.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crcal/report.hpp"

namespace crcal {

struct ExternalModel {
  std::string name;
  // Paths may contain "{seed}", replaced by the seed of each run.
  std::string cal_bundle;
  std::string test_bundle;
};

struct BenchConfig {
  std::string source = "synthetic";  // "synthetic" or "csv"
  std::size_t n = 25000;             // synthetic cohort size
  std::string cohort_path;           // csv source
  int k_events = 3;                  // csv source
  std::vector<std::string> models{"aj"};  // aj, oracle, distorted_oracle
  std::vector<ExternalModel> external_models;
  std::vector<std::string> methods{"base", "aj", "ts"};
  std::size_t grid_size = 64;
  MetricParams params;
  double level = 0.05;
  std::array<double, 3> fractions{0.4, 0.4, 0.2};
  bool evaluate = true;

  static BenchConfig from_json(const Json& json);
  Json to_json() const;
};

struct SummaryRow {
  std::string model;
  std::string method;
  std::string metric;
  std::vector<double> values;  // one per seed
  double mean = 0.0;
  double std = 0.0;
};

struct BenchSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<SummaryRow> rows;

  const SummaryRow& row(const std::string& model, const std::string& method,
                        const std::string& metric) const;
};

// Runs every seed, writing per-seed reports under out_dir/seed_<s>/ and the
// aggregated summary.json / summary.csv under out_dir. An empty out_dir skips
// all file output.
BenchSummary run_benchmark(const BenchConfig& config, const std::vector<std::uint64_t>& seeds,
                           const std::string& out_dir);

Json to_json(const BenchSummary& summary);
std::string summary_csv(const BenchSummary& summary);

}  // namespace crcal
