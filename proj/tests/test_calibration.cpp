#include <cmath>

#include "crcal/calibration.hpp"
#include "crcal/errors.hpp"
#include "crcal/marginal.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace crcal;

namespace {

// Two uncensored samples on grid (1, 2). Sample A has event 1 at t=1 with
// ratio F1(1)/F1(2) = 0.3; sample B has event 2. Terminal event-1 mass sums to 1,
// so the event-1 bucket is 1{rho >= 0.3}.
struct Toy {
  Cohort cohort = testing::make_cohort({1.0, 1.0}, {1, 2}, 2);
  CifBundle bundle{TimeGrid({1.0, 2.0}), 2, testing::make_ids(2),
                   std::vector<double>{0.18, 0.6, 0.0, 0.1,    // A: F1, F2
                                       0.1, 0.4, 0.3, 0.5}};   // B
};

// Closed-form alpha-norm of 1{rho >= c} - rho on the discrete grid j/M.
double step_toy_norm(double c, std::size_t m, double alpha) {
  double acc = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double rho = static_cast<double>(j) / static_cast<double>(m);
    acc += std::pow(std::abs((rho >= c ? 1.0 : 0.0) - rho), alpha) / static_cast<double>(m);
  }
  return std::pow(acc, 1.0 / alpha);
}

}  // namespace

TEST_SUITE("bucket mass") {
  TEST_CASE("uncensored step toy") {
    Toy toy;
    CHECK(bucket_mass(toy.bundle, toy.cohort, 1, 0.29) == 0.0);
    CHECK(bucket_mass(toy.bundle, toy.cohort, 1, 0.31) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bucket_mass(toy.bundle, toy.cohort, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bucket_mass(toy.bundle, toy.cohort, 1, 0.0) == 0.0);
  }

  TEST_CASE("censored contribution") {
    // F1(inf)=0.5, F1(t)=0.1, S(t)=0.8: at rho=0.5 the numerator gains (0.25-0.1)/0.8.
    const auto cohort = testing::make_cohort({1.0}, {0}, 2);
    const CifBundle bundle(TimeGrid({1.0, 2.0}), 2, testing::make_ids(1),
                           {0.1, 0.5, 0.1, 0.2});
    const double expected = ((0.25 - 0.1) / 0.8) / 0.5;
    CHECK(bucket_mass(bundle, cohort, 1, 0.5) == doctest::Approx(expected).epsilon(1e-14));
    // Ratio 0.2 lies outside [0, 0.1].
    CHECK(bucket_mass(bundle, cohort, 1, 0.1) == 0.0);
    // Boundary is closed: ratio 0.2 lies in [0, 0.2], where the adjustment is zero.
    CHECK(bucket_mass(bundle, cohort, 1, 0.2) == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("closed boundary on events") {
    const auto cohort = testing::make_cohort({1.0}, {1}, 1);
    const CifBundle bundle(TimeGrid({1.0, 2.0}), 1, testing::make_ids(1), {0.25, 0.5});
    CHECK(bucket_mass(bundle, cohort, 1, 0.5) == 2.0);
    CHECK(bucket_mass(bundle, cohort, 1, std::nextafter(0.5, 0.0)) == 0.0);
  }

  TEST_CASE("full bucket telescopes") {
    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
      const auto c = testing::random_cohort(rng, 40, 2, 0.4);
      const TimeGrid grid({0.5, 1.0, 2.0, 4.0, 50.0});
      const auto b = testing::random_bundle(rng, c.ids(), grid, 2);
      for (int k = 1; k <= 2; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
          const double tail = b.terminal(i, k);
          den += tail;
          if (c.event(i) == k) num += 1.0;
          if (c.event(i) == 0) num += (tail - b.cif(i, k, c.time(i))) / b.survival(i, c.time(i));
        }
        CHECK(bucket_mass(b, c, k, 1.0) == doctest::Approx(num / den).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("interval bucket") {
    Toy toy;
    CHECK(interval_bucket(toy.bundle, toy.cohort, 1, 0.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(interval_bucket(toy.bundle, toy.cohort, 1, 0.2, 0.5) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(interval_bucket(toy.bundle, toy.cohort, 1, 0.4, 0.5) == 0.0);
    CHECK_THROWS_AS(interval_bucket(toy.bundle, toy.cohort, 1, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(interval_bucket(toy.bundle, toy.cohort, 1, 0.6, 0.5), ValidationError);
  }

  TEST_CASE("vanishing survival at a censoring time") {
    // Survival is zero at t=1 yet event 1 still gains mass afterwards (within the sum tolerance).
    const auto cohort = testing::make_cohort({1.0}, {0}, 2);
    const CifBundle live(TimeGrid({1.0, 2.0}), 2, testing::make_ids(1),
                         {0.5, 0.5 + 5e-7, 0.5, 0.5});
    CHECK_THROWS_AS(bucket_mass(live, cohort, 1, 0.5), NumericError);
    // Event-2 mass is exhausted, so that sample simply contributes nothing.
    CHECK(bucket_mass(live, cohort, 2, 1.0) == 0.0);
  }

  TEST_CASE("uniform downscaling leaves event counts unchanged") {
    Rng rng(21);
    const TimeGrid grid({0.5, 1.0, 2.0, 4.0, 50.0});
    for (int rep = 0; rep < 10; ++rep) {
      auto c = testing::random_cohort(rng, 50, 2, 0.0);
      const auto b = testing::random_bundle(rng, c.ids(), grid, 2);
      auto scaled_values = b.values();
      const double factor = 0.37;
      for (std::size_t s = 0; s < b.size(); ++s)
        for (std::size_t j = 0; j < grid.size(); ++j)
          scaled_values[(s * 2) * grid.size() + j] *= factor;
      const CifBundle scaled(grid, 2, b.sample_ids(), scaled_values);
      double w = 0.0, ws = 0.0;
      for (std::size_t s = 0; s < b.size(); ++s) {
        w += b.terminal(s, 1);
        ws += scaled.terminal(s, 1);
      }
      for (double rho : {0.1, 0.35, 0.8, 1.0})
        CHECK(bucket_mass(scaled, c, 1, rho) * ws ==
              doctest::Approx(bucket_mass(b, c, 1, rho) * w).epsilon(1e-12));
    }
  }
}

TEST_SUITE("d-calibration metric") {
  TEST_CASE("step toy, alpha = 1") {
    Toy toy;
    const auto d = cr_d_hat(toy.bundle, toy.cohort, MetricParams{1.0, 100000});
    CHECK(d.per_event.at(1) == doctest::Approx(0.29).epsilon(1e-4));
    CHECK(d.per_event.at(1) == doctest::Approx(step_toy_norm(0.3, 100000, 1.0)).epsilon(1e-3));
  }

  TEST_CASE("step toy, infinite alpha") {
    Toy toy;
    const auto d = cr_d_hat(toy.bundle, toy.cohort, MetricParams{kInfiniteAlpha, 100000});
    CHECK(d.per_event.at(1) == doctest::Approx(0.7).epsilon(1e-4));
  }

  TEST_CASE("zero deviation norm") {
    const std::vector<double> zero(50, 0.0);
    for (double a : {1.0, 2.0, 3.5, kInfiniteAlpha}) CHECK(deviation_norm(zero, a) == 0.0);
  }

  TEST_CASE("norm ordering and totals") {
    Rng rng(4);
    const auto c = testing::random_cohort(rng, 200, 3, 0.3);
    const auto b = testing::random_bundle(rng, c.ids(), TimeGrid({0.5, 1.0, 2.0, 8.0, 60.0}), 3);
    const auto d1 = cr_d_hat(b, c, MetricParams{1.0, 100});
    const auto d2 = cr_d_hat(b, c, MetricParams{2.0, 100});
    const auto di = cr_d_hat(b, c, MetricParams{kInfiniteAlpha, 100});
    double total = 0.0;
    for (int k = 1; k <= 3; ++k) {
      CHECK(d1.per_event.at(k) <= d2.per_event.at(k) + 1e-12);
      CHECK(d2.per_event.at(k) <= di.per_event.at(k) + 1e-12);
      total += d2.per_event.at(k);
    }
    CHECK(d2.total == doctest::Approx(total).epsilon(1e-15));
  }

  TEST_CASE("parameter validation") {
    Toy toy;
    CHECK_THROWS_AS(cr_d_hat(toy.bundle, toy.cohort, MetricParams{0.5, 100}), ValidationError);
    CHECK_THROWS_AS(cr_d_hat(toy.bundle, toy.cohort, MetricParams{2.0, 0}), ValidationError);
  }
}

TEST_SUITE("plug-in calibration") {
  // Marginal curve 0.4 from t=0.5 on (one jump), bundle mean 0.3 at every grid time.
  MarginalCurveSet constant_marginal(double level) {
    MarginalCurveSet m;
    m.event_times = {0.5};
    m.km_survival = StepCurve{{0.5}, {1.0 - level}, 1.0};
    m.aj_cif = {StepCurve{{0.5}, {level}, 0.0}};
    m.censoring_survival = StepCurve{{}, {}, 1.0};
    return m;
  }

  TEST_CASE("pointwise gap") {
    const auto m = constant_marginal(0.4);
    const CifBundle b(TimeGrid({1.0, 2.0}), 1, testing::make_ids(2), {0.2, 0.2, 0.4, 0.4});
    CHECK(pi_cal_tau(b, m, 1, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
    // Before the first grid time the bundle is zero; before the first jump AJ is zero.
    CHECK(pi_cal_tau(b, m, 1, 0.7) == doctest::Approx(0.4).epsilon(1e-15));
    const CifBundle early(TimeGrid({0.1, 2.0}), 1, testing::make_ids(1), {0.05, 0.5});
    CHECK(pi_cal_tau(early, m, 1, 0.2) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK_THROWS_AS(pi_cal_tau(b, m, 1, 3.0), ValidationError);
  }

  TEST_CASE("constant gap 0.1 on [0, 2]") {
    const auto m = constant_marginal(0.2);
    const CifBundle b(TimeGrid({1.0, 2.0}), 1, testing::make_ids(1), {0.1, 0.1});
    const auto pi = pi_cal_alpha(b, m, MetricParams{2.0, 100}, b.grid());
    CHECK(pi.per_event.at(1) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-14));
    const auto sup = pi_cal_alpha(b, m, MetricParams{kInfiniteAlpha, 100}, b.grid());
    CHECK(sup.per_event.at(1) == doctest::Approx(0.1).epsilon(1e-14));
  }

  TEST_CASE("aalen-johansen against itself") {
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
      const auto c = testing::random_cohort(rng, 150, 3, 0.3);
      const auto m = aalen_johansen(c);
      const auto grid = quantile_grid(c, 32);
      const auto b = replicate_marginal(m, grid, c.ids());
      const auto pi = pi_cal_alpha(b, m, MetricParams{}, grid);
      CHECK(pi.total <= 1e-12);
    }
  }
}
