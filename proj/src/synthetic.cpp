#include "crcal/synthetic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "crcal/errors.hpp"
#include "crcal/parallel.hpp"

namespace crcal {

void WeibullConfig::validate() const {
  for (int k = 0; k < kEvents; ++k) {
    const auto& sc = scale[static_cast<std::size_t>(k)];
    const auto& sh = shape[static_cast<std::size_t>(k)];
    if (!(sc.lo > 0.0 && sc.hi >= sc.lo) || !(sh.lo > 0.0 && sh.hi >= sh.lo))
      throw ValidationError("Weibull parameter ranges must be positive and ordered");
  }
  if (censoring_scale && !(*censoring_scale > 0.0))
    throw ValidationError("censoring scale must be positive");
  if (!censoring_scale && censoring_presample == 0)
    throw ValidationError("censoring pre-sample must be nonempty");
}

double LatentRecord::cumulative_hazard(double t) const {
  double h = 0.0;
  for (std::size_t k = 0; k < scales.size(); ++k) h += std::pow(t / scales[k], shapes[k]);
  return h;
}

double LatentRecord::survival(double t) const { return std::exp(-cumulative_hazard(t)); }

LatentRecord draw_latent(const WeibullConfig& config, Rng& rng, double censoring_scale) {
  LatentRecord r;
  for (std::size_t k = 0; k < 3; ++k)
    r.scales[k] = rng.uniform(config.scale[k].lo, config.scale[k].hi);
  for (std::size_t k = 0; k < 3; ++k)
    r.shapes[k] = rng.uniform(config.shape[k].lo, config.shape[k].hi);
  r.true_time = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 3; ++k) {
    // Inverse transform of 1 - exp(-(t / scale)^shape).
    const double t = r.scales[k] * std::pow(-std::log(rng.uniform()), 1.0 / r.shapes[k]);
    if (t < r.true_time) {
      r.true_time = t;
      r.true_event = static_cast<int>(k) + 1;
    }
  }
  const double u = rng.uniform();
  r.censor_time = std::isinf(censoring_scale) ? std::numeric_limits<double>::infinity()
                                              : -censoring_scale * std::log(u);
  return r;
}

double estimate_censoring_scale(const WeibullConfig& config, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "censoring-scale");
  double sum = 0.0;
  for (std::size_t i = 0; i < config.censoring_presample; ++i)
    sum += draw_latent(config, rng, std::numeric_limits<double>::infinity()).true_time;
  return 1.5 * sum / static_cast<double>(config.censoring_presample);
}

SyntheticCohort generate_cohort(const WeibullConfig& config, std::size_t n, std::uint64_t seed) {
  config.validate();
  if (n == 0) throw ValidationError("synthetic cohort size must be positive");
  SyntheticCohort out;
  out.censoring_scale = config.censoring_scale ? *config.censoring_scale
                                               : estimate_censoring_scale(config, seed);
  Rng rng = Rng::substream(seed, "cohort");
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<int> events;
  std::vector<double> cov;
  out.latents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = draw_latent(config, rng, out.censoring_scale);
    ids.push_back(std::to_string(i + 1));
    times.push_back(r.observed_time());
    events.push_back(r.observed_event());
    cov.insert(cov.end(), {r.scales[0], r.scales[2], r.shapes[0], r.shapes[1], r.shapes[2]});
    out.latents.push_back(r);
  }
  out.cohort = Cohort(std::move(ids), std::move(times), std::move(events), WeibullConfig::kEvents,
                      {"l1", "l3", "s1", "s2", "s3"}, std::move(cov));
  return out;
}

namespace {

using Triple = std::array<double, 3>;

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kQuadratureTolerance = 1e-11;
constexpr int kMaxDepth = 40;

// Weibull parameters in the form the integrand uses.
struct Hazards {
  Triple shapes;
  Triple log_scales;
  explicit Hazards(const LatentRecord& r) : shapes(r.shapes) {
    for (std::size_t k = 0; k < 3; ++k) log_scales[k] = std::log(r.scales[k]);
  }
};

// Cause-specific densities h_k(s) S(s).
Triple integrand(const Hazards& h, double s) {
  const double log_s = std::log(s);
  Triple u{};
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) total += (u[k] = std::exp(h.shapes[k] * (log_s - h.log_scales[k])));
  const double surv = std::exp(-total);
  Triple out{};
  if (surv == 0.0) return out;
  for (std::size_t k = 0; k < 3; ++k) out[k] = h.shapes[k] * u[k] / s * surv;
  return out;
}

void gauss_kronrod(const Hazards& r, double a, double b, Triple& kronrod, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Triple gauss{};
  kronrod = {};
  for (std::size_t m = 0; m < 8; ++m) {
    const double dx = half * kKronrodNodes[m];
    const Triple f1 = integrand(r, center - dx);
    const Triple f2 = m == 7 ? Triple{} : integrand(r, center + dx);
    for (std::size_t k = 0; k < 3; ++k) {
      const double sum = m == 7 ? f1[k] : f1[k] + f2[k];
      kronrod[k] += kKronrodWeights[m] * sum;
      if (m % 2 == 1) gauss[k] += kGaussWeights[m / 2] * sum;
    }
  }
  error = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    kronrod[k] *= half;
    error = std::max(error, std::abs(kronrod[k] - gauss[k] * half));
  }
}

void integrate(const Hazards& r, double a, double b, double tolerance, int depth,
               Triple& acc) {
  Triple value;
  double error;
  gauss_kronrod(r, a, b, value, error);
  if (error <= tolerance || depth >= kMaxDepth) {
    for (std::size_t k = 0; k < 3; ++k) acc[k] += value[k];
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate(r, a, mid, 0.5 * tolerance, depth + 1, acc);
  integrate(r, mid, b, 0.5 * tolerance, depth + 1, acc);
}

}  // namespace

std::array<double, 3> oracle_cifs(const LatentRecord& latent, double t) {
  Triple acc{};
  if (t > 0.0) integrate(Hazards(latent), 0.0, t, kQuadratureTolerance, 0, acc);
  for (double& v : acc) v = std::clamp(v, 0.0, 1.0);
  return acc;
}

double oracle_cif(const LatentRecord& latent, int k, double t) {
  if (k < 1 || k > 3) throw ValidationError("event index out of range");
  return oracle_cifs(latent, t)[static_cast<std::size_t>(k - 1)];
}

double horizon_proxy(const LatentRecord& latent, double survival_level) {
  const double target = -std::log(survival_level);
  double lo = 0.0, hi = 1.0;
  while (latent.cumulative_hazard(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (latent.cumulative_hazard(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

CifBundle oracle_bundle(const std::vector<LatentRecord>& latents,
                        const std::vector<std::string>& ids, const TimeGrid& grid) {
  if (latents.empty()) throw ValidationError("oracle bundle needs at least one latent record");
  if (ids.size() != latents.size()) throw ValidationError("one id per latent record required");
  const std::size_t d = grid.size();
  std::vector<double> values(latents.size() * 3 * d);
  parallel_for(latents.size(), [&](std::size_t s) {
    const Hazards hazards(latents[s]);
    Triple acc{};
    double previous = 0.0;
    double* block = values.data() + s * 3 * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double tol = kQuadratureTolerance / static_cast<double>(d);
      integrate(hazards, previous, grid[j], tol, 0, acc);
      previous = grid[j];
      double total = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        double v = std::clamp(acc[k], 0.0, 1.0);
        if (j > 0) v = std::max(v, block[k * d + j - 1]);
        block[k * d + j] = v;
        total += v;
      }
      // Quadrature noise can push the total a hair past one near the horizon.
      double prev_total = 0.0;
      for (std::size_t k = 0; k < 3; ++k) prev_total += j > 0 ? block[k * d + j - 1] : 0.0;
      const double cap = std::max(1.0, prev_total);
      if (total > cap) {
        const double shrink = (cap - prev_total) / (total - prev_total);
        for (std::size_t k = 0; k < 3; ++k) {
          const double before = j > 0 ? block[k * d + j - 1] : 0.0;
          block[k * d + j] = before + (block[k * d + j] - before) * shrink;
        }
      }
    }
  });
  return CifBundle(grid, 3, ids, std::move(values));
}

TimeGrid oracle_grid(const Cohort& cohort, const std::vector<LatentRecord>& latents,
                     std::size_t d) {
  auto times = quantile_grid(cohort, d).times();
  double proxy = 0.0;
  for (const auto& r : latents) proxy = std::max(proxy, horizon_proxy(r));
  if (proxy > times.back()) times.push_back(proxy);
  return TimeGrid(std::move(times));
}

CifBundle square_distort(const CifBundle& bundle) {
  std::vector<double> values = bundle.values();
  for (double& v : values) v *= v;
  return CifBundle(bundle.grid(), bundle.k_events(), bundle.sample_ids(), std::move(values));
}

std::string serialize_latents(const std::vector<LatentRecord>& latents,
                              const std::vector<std::string>& ids) {
  std::ostringstream out;
  out << "id,l1,l2,l3,s1,s2,s3,tstar,dstar,ctime\n";
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto& r = latents[i];
    out << ids.at(i);
    for (double v : r.scales) out << ',' << format_double(v);
    for (double v : r.shapes) out << ',' << format_double(v);
    out << ',' << format_double(r.true_time) << ',' << r.true_event << ','
        << format_double(r.censor_time) << '\n';
  }
  return out.str();
}

}  // namespace crcal
