#include "crcal/errors.hpp"
#include "crcal/marginal.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace crcal;
using testing::make_cohort;

TEST_SUITE("kaplan-meier") {
  TEST_CASE("all events") {
    const auto s = kaplan_meier(make_cohort({1, 2, 3}, {1, 1, 1}, 1));
    CHECK(s.at(0.5) == 1.0);
    CHECK(s.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.at(3) == 0.0);
  }

  TEST_CASE("censoring in the middle") {
    const auto s = kaplan_meier(make_cohort({1, 2, 3}, {1, 0, 1}, 1));
    CHECK(s.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.at(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.at(3) == 0.0);
    CHECK(s.left_limit(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("all censored") {
    const auto s = kaplan_meier(make_cohort({1, 2, 3}, {0, 0, 0}, 1));
    for (double t : {0.0, 1.0, 2.5, 3.0, 10.0}) CHECK(s.at(t) == 1.0);
  }

  TEST_CASE("empty cohort") { CHECK_THROWS_AS(kaplan_meier(Cohort{}), ValidationError); }
}

TEST_SUITE("censoring survival") {
  TEST_CASE("role flip") {
    const auto g = censoring_survival(make_cohort({1, 2}, {0, 1}, 1));
    CHECK(g.at(1) == 0.5);
    CHECK(g.at(2) == 0.5);
    CHECK(g.left_limit(1) == 1.0);
  }

  TEST_CASE("no censoring") {
    const auto g = censoring_survival(make_cohort({1, 2, 3}, {1, 2, 1}, 2));
    for (double t : {0.5, 1.0, 3.0, 8.0}) CHECK(g.at(t) == 1.0);
  }

  TEST_CASE("tied event and censoring") {
    const auto g = censoring_survival(make_cohort({1, 1}, {0, 1}, 1));
    CHECK(g.at(1) == 0.0);
  }
}

TEST_SUITE("aalen-johansen") {
  TEST_CASE("three records, two causes") {
    const auto m = aalen_johansen(make_cohort({1, 2, 3}, {1, 2, 1}, 2));
    CHECK(m.cif(1).at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.cif(2).at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.cif(1).at(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    for (double t : {0.5, 1.0, 2.0, 3.0})
      CHECK(m.cif(1).at(t) + m.cif(2).at(t) + m.km_survival.at(t) ==
            doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("single record") {
    const auto m = aalen_johansen(make_cohort({1}, {1}, 1));
    CHECK(m.cif(1).at(1) == 1.0);
    CHECK(m.cif(1).at(0.5) == 0.0);
  }

  TEST_CASE("sum identity with ties and censoring") {
    Rng rng(2024);
    for (int rep = 0; rep < 40; ++rep) {
      const int k = 1 + rep % 4;
      const auto c = testing::random_cohort(rng, 20 + rep * 5, k, 0.1 + 0.02 * rep, 0.25);
      const auto m = aalen_johansen(c);
      for (double t : m.event_times) {
        double sum = m.km_survival.at(t);
        for (int e = 1; e <= k; ++e) sum += m.cif(e).at(t);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
      }
      for (int e = 1; e <= k; ++e)
        CHECK(std::is_sorted(m.cif(e).values.begin(), m.cif(e).values.end()));
    }
  }
}

TEST_CASE("replicated marginal bundle") {
  const auto c = make_cohort({1, 2, 3, 4}, {1, 2, 0, 1}, 2);
  const auto m = aalen_johansen(c);
  const TimeGrid grid({1.5, 2.5, 4.0});
  const auto b = replicate_marginal(m, grid, c.ids());
  REQUIRE(b.size() == 4);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(b.at(s, 1, j) == m.cif(1).at(grid[j]));
      CHECK(b.at(s, 2, j) == m.cif(2).at(grid[j]));
    }
  const auto csv = serialize_step_curve(m.km_survival);
  CHECK(csv.rfind("time,value\n0,1\n", 0) == 0);
}
