#pragma once

// Weibull competing-risks generator with three causes and the exact
// conditional CIFs of each simulated individual.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crcal/data_model.hpp"
#include "crcal/random.hpp"

namespace crcal {

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct WeibullConfig {
  static constexpr int kEvents = 3;

  std::array<UniformRange, kEvents> scale{{{0.4, 0.9}, {1.0, 1.0}, {1.2, 3.0}}};
  std::array<UniformRange, kEvents> shape{{{1.0, 20.0}, {1.0, 10.0}, {1.5, 5.0}}};
  // Exponential censoring scale. Unset: 1.5 x a Monte-Carlo estimate of E[T*].
  // Infinity disables censoring.
  std::optional<double> censoring_scale;
  std::size_t censoring_presample = 10000;

  void validate() const;
};

struct LatentRecord {
  std::array<double, WeibullConfig::kEvents> scales{};
  std::array<double, WeibullConfig::kEvents> shapes{};
  double true_time = 0.0;
  int true_event = 1;
  double censor_time = 0.0;

  double cumulative_hazard(double t) const;
  // Closed-form all-cause survival exp(-sum_j (t / scale_j)^shape_j).
  double survival(double t) const;
  double observed_time() const { return std::min(true_time, censor_time); }
  int observed_event() const { return true_time <= censor_time ? true_event : 0; }
};

struct SyntheticCohort {
  Cohort cohort;  // covariates (l1, l3, s1, s2, s3)
  std::vector<LatentRecord> latents;
  double censoring_scale = 0.0;
};

// Draws covariates and latent event times for one individual.
LatentRecord draw_latent(const WeibullConfig& config, Rng& rng, double censoring_scale);

double estimate_censoring_scale(const WeibullConfig& config, std::uint64_t seed);

SyntheticCohort generate_cohort(const WeibullConfig& config, std::size_t n, std::uint64_t seed);

// F_k(t | x) for all three causes by adaptive Gauss-Kronrod quadrature of
// h_k(s) S(s) over [0, t].
std::array<double, WeibullConfig::kEvents> oracle_cifs(const LatentRecord& latent, double t);
double oracle_cif(const LatentRecord& latent, int k, double t);

// Time at which the closed-form survival first drops below 1e-6.
double horizon_proxy(const LatentRecord& latent, double survival_level = 1e-6);

CifBundle oracle_bundle(const std::vector<LatentRecord>& latents,
                        const std::vector<std::string>& ids, const TimeGrid& grid);

// Duration quantile grid extended with the largest horizon proxy so the
// terminal value stands in for F_k(infinity | x).
TimeGrid oracle_grid(const Cohort& cohort, const std::vector<LatentRecord>& latents,
                     std::size_t d);

// Each F_k replaced by F_k^2; survival absorbs the rest.
CifBundle square_distort(const CifBundle& bundle);

std::string serialize_latents(const std::vector<LatentRecord>& latents,
                              const std::vector<std::string>& ids);

}  // namespace crcal
