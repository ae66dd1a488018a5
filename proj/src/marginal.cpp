#include "crcal/marginal.hpp"

#include <algorithm>
#include <numeric>

#include "crcal/errors.hpp"

namespace crcal {

double StepCurve::at(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return initial_value;
  return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

double StepCurve::left_limit(double t) const {
  auto it = std::lower_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return initial_value;
  return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

namespace {

// Counts per distinct observed time, ascending.
struct TimeTable {
  std::vector<double> times;
  std::vector<long> at_risk;
  std::vector<long> events;                 // any cause
  std::vector<std::vector<long>> by_cause;  // [k-1][time]
  std::vector<long> censored;
};

TimeTable tabulate(const Cohort& cohort) {
  if (cohort.empty()) throw ValidationError("estimator needs a nonempty cohort");
  const std::size_t n = cohort.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cohort.time(a) < cohort.time(b); });
  TimeTable table;
  table.by_cause.resize(static_cast<std::size_t>(cohort.k_events()));
  long remaining = static_cast<long>(n);
  for (std::size_t p = 0; p < n;) {
    const double t = cohort.time(order[p]);
    table.times.push_back(t);
    table.at_risk.push_back(remaining);
    long ev = 0, cens = 0;
    for (auto& c : table.by_cause) c.push_back(0);
    for (; p < n && cohort.time(order[p]) == t; ++p) {
      const int e = cohort.event(order[p]);
      if (e == 0) {
        ++cens;
      } else {
        ++ev;
        ++table.by_cause[static_cast<std::size_t>(e - 1)].back();
      }
    }
    table.events.push_back(ev);
    table.censored.push_back(cens);
    remaining -= ev + cens;
  }
  return table;
}

}  // namespace

StepCurve kaplan_meier(const Cohort& cohort) {
  const auto table = tabulate(cohort);
  StepCurve curve{table.times, {}, 1.0};
  curve.values.reserve(table.times.size());
  double s = 1.0;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    const double y = static_cast<double>(table.at_risk[j]);
    s *= (y - static_cast<double>(table.events[j])) / y;
    curve.values.push_back(s);
  }
  return curve;
}

StepCurve censoring_survival(const Cohort& cohort) {
  const auto table = tabulate(cohort);
  StepCurve curve{table.times, {}, 1.0};
  curve.values.reserve(table.times.size());
  double g = 1.0;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    const double y = static_cast<double>(table.at_risk[j] - table.events[j]);
    if (table.censored[j] > 0) g *= (y - static_cast<double>(table.censored[j])) / y;
    curve.values.push_back(g);
  }
  return curve;
}

MarginalCurveSet aalen_johansen(const Cohort& cohort) {
  const auto table = tabulate(cohort);
  const std::size_t k_events = static_cast<std::size_t>(cohort.k_events());
  MarginalCurveSet out;
  out.event_times = table.times;
  out.km_survival = StepCurve{table.times, {}, 1.0};
  out.aj_cif.assign(k_events, StepCurve{table.times, {}, 0.0});
  std::vector<double> f(k_events, 0.0);
  double s = 1.0;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    const double y = static_cast<double>(table.at_risk[j]);
    const double s_left = s;
    for (std::size_t k = 0; k < k_events; ++k) {
      f[k] += s_left * static_cast<double>(table.by_cause[k][j]) / y;
      out.aj_cif[k].values.push_back(f[k]);
    }
    s = s_left * (y - static_cast<double>(table.events[j])) / y;
    out.km_survival.values.push_back(s);
  }
  out.censoring_survival = censoring_survival(cohort);
  return out;
}

CifBundle replicate_marginal(const MarginalCurveSet& marginal, const TimeGrid& grid,
                             std::vector<std::string> sample_ids) {
  const int k_events = static_cast<int>(marginal.aj_cif.size());
  std::vector<double> block;
  block.reserve(static_cast<std::size_t>(k_events) * grid.size());
  for (int k = 1; k <= k_events; ++k)
    for (double t : grid.times()) block.push_back(marginal.cif(k).at(t));
  std::vector<double> values;
  values.reserve(sample_ids.size() * block.size());
  for (std::size_t s = 0; s < sample_ids.size(); ++s)
    values.insert(values.end(), block.begin(), block.end());
  return CifBundle(grid, k_events, std::move(sample_ids), std::move(values));
}

std::string serialize_step_curve(const StepCurve& curve) {
  std::string out = "time,value\n0," + format_double(curve.initial_value) + "\n";
  for (std::size_t j = 0; j < curve.jump_times.size(); ++j)
    out += format_double(curve.jump_times[j]) + "," + format_double(curve.values[j]) + "\n";
  return out;
}

}  // namespace crcal
