#pragma once

// Shared domain types: observed cohorts, evaluation grids and per-sample
// cumulative incidence predictions, plus their CSV formats.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace crcal {

// Observed competing-risks records (time, event) with event 0 = censored and
// events 1..K the competing causes. Covariates are passthrough metadata.
class Cohort {
 public:
  Cohort() = default;
  Cohort(std::vector<std::string> ids, std::vector<double> times, std::vector<int> events,
         int k_events, std::vector<std::string> covariate_names = {},
         std::vector<double> covariates = {});

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  int k_events() const { return k_events_; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<int>& events() const { return events_; }
  double time(std::size_t i) const { return times_[i]; }
  int event(std::size_t i) const { return events_[i]; }

  bool has_covariates() const { return !covariate_names_.empty(); }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  std::size_t covariate_count() const { return covariate_names_.size(); }
  // Row i of the covariate matrix.
  std::span<const double> covariates(std::size_t i) const;

  // Records at the given positions, in that order.
  Cohort subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> times_;
  std::vector<int> events_;
  int k_events_ = 1;
  std::vector<std::string> covariate_names_;
  std::vector<double> covariates_;  // row-major, size() x covariate_count()
};

class TimeGrid {
 public:
  TimeGrid() = default;
  // Requires at least two strictly increasing, positive, finite times.
  explicit TimeGrid(std::vector<double> times);

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t j) const { return times_[j]; }
  double t_max() const { return times_.back(); }

  // Index of the last grid time <= t, or -1 when t precedes the grid.
  std::ptrdiff_t step_index(double t) const;

 private:
  std::vector<double> times_;
};

// Per-sample, per-event CIF values on a common grid. The terminal grid value
// stands in for F_k(infinity | x).
class CifBundle {
 public:
  static constexpr double kSumTolerance = 1e-6;

  CifBundle() = default;
  // values is laid out [sample][event-1][grid index]. Validates ranges,
  // monotonicity and the per-time sum constraint.
  CifBundle(TimeGrid grid, int k_events, std::vector<std::string> sample_ids,
            std::vector<double> values);

  const TimeGrid& grid() const { return grid_; }
  int k_events() const { return k_events_; }
  std::size_t size() const { return sample_ids_.size(); }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<double>& values() const { return values_; }

  // Value at grid index j for event k (1-based).
  double at(std::size_t sample, int k, std::size_t j) const {
    return values_[offset(sample, k) + j];
  }
  std::span<const double> curve(std::size_t sample, int k) const {
    return {values_.data() + offset(sample, k), grid_.size()};
  }
  // Right-continuous step evaluation; zero before the first grid time.
  double cif(std::size_t sample, int k, double t) const;
  double terminal(std::size_t sample, int k) const { return at(sample, k, grid_.size() - 1); }
  // Implied all-cause survival 1 - sum_k F_k, floored at zero.
  double survival(std::size_t sample, double t) const;
  double survival_at(std::size_t sample, std::size_t j) const;

  // Throws ValidationError when some F_k(t_max | x) is zero.
  void require_positive_terminal() const;

  // Samples reordered to match ids; throws when an id is missing.
  CifBundle select(std::span<const std::string> ids) const;

 private:
  std::size_t offset(std::size_t sample, int k) const {
    return (sample * static_cast<std::size_t>(k_events_) + static_cast<std::size_t>(k - 1)) *
           grid_.size();
  }

  TimeGrid grid_;
  int k_events_ = 1;
  std::vector<std::string> sample_ids_;
  std::vector<double> values_;
};

// Throws ValidationError unless bundle sample i carries the id of cohort record i.
void require_aligned(const CifBundle& bundle, const Cohort& cohort);

Cohort parse_cohort(std::string_view csv_text, int k_events);
CifBundle parse_bundle(std::string_view csv_text, int k_events);
std::string serialize_cohort(const Cohort& cohort);
std::string serialize_bundle(const CifBundle& bundle);

// Shortest-form-independent text for a double: 17 significant digits.
std::string format_double(double value);

struct CohortSplit {
  Cohort train;
  Cohort calibration;
  Cohort test;
  std::array<std::vector<std::size_t>, 3> rows;  // source positions of each part
};

// Seeded disjoint partition with largest-remainder sizes.
CohortSplit split_cohort(const Cohort& cohort, std::uint64_t seed,
                         std::array<double, 3> fractions = {0.4, 0.4, 0.2});

// Lower-interpolation quantiles of the observed durations at levels j/d.
TimeGrid quantile_grid(const Cohort& cohort, std::size_t d);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace crcal
