#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crcal/data_model.hpp"
#include "crcal/random.hpp"

namespace testing {

inline std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return ids;
}

inline crcal::Cohort make_cohort(std::vector<double> times, std::vector<int> events, int k) {
  auto ids = make_ids(times.size());
  return crcal::Cohort(std::move(ids), std::move(times), std::move(events), k);
}

// Random cohort with ties (times rounded to a coarse lattice) and a censoring
// probability of censor_prob.
inline crcal::Cohort random_cohort(crcal::Rng& rng, std::size_t n, int k, double censor_prob,
                                   double lattice = 0.25) {
  std::vector<double> times;
  std::vector<int> events;
  for (std::size_t i = 0; i < n; ++i) {
    double t = -std::log(rng.uniform()) * 3.0;
    if (lattice > 0) t = lattice * (1.0 + std::floor(t / lattice));
    times.push_back(t);
    events.push_back(rng.uniform() < censor_prob ? 0 : 1 + static_cast<int>(rng.below(k)));
  }
  return make_cohort(std::move(times), std::move(events), k);
}

// Random valid bundle: per sample, increments of every event plus a survival
// remainder drawn as normalized exponentials, so sums stay below one.
inline crcal::CifBundle random_bundle(crcal::Rng& rng, const std::vector<std::string>& ids,
                                      const crcal::TimeGrid& grid, int k) {
  const std::size_t d = grid.size();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> values(ids.size() * kk * d);
  for (std::size_t s = 0; s < ids.size(); ++s) {
    std::vector<double> w(kk * d + 1);
    double total = 0.0;
    for (double& x : w) total += (x = -std::log(rng.uniform()));
    for (std::size_t e = 0; e < kk; ++e) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += w[e * d + j] / total;
        values[(s * kk + e) * d + j] = acc;
      }
    }
  }
  return crcal::CifBundle(grid, k, ids, std::move(values));
}

}  // namespace testing
