#include <cmath>

#include "doctest.h"
#include "rwre/harness.hpp"

using namespace rwre;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.T = 0.25;
  c.deltas = {0.25, 0.125, 0.0625};
  c.delta_ref = 0.03125;
  c.seeds = {1, 2, 3};
  c.window = 16.0;
  c.params.alpha = 0.4;
  c.params.beta = 0.34;
  c.params.beta2 = 0.38;
  c.params.chi = 0.12;
  c.params.radii = {1.0, 2.0};
  c.resamples = 200;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("closed-form exponents") {
    CHECK(zeta_floor() == doctest::Approx((9.0 - std::sqrt(57.0)) / 24.0).epsilon(1e-15));
    CHECK(alpha_star() == doctest::Approx((3.0 + std::sqrt(57.0)) / 24.0).epsilon(1e-15));
    CHECK(zeta_floor() + alpha_star() == doctest::Approx(0.5));
    const ExponentResult e = optimal_exponent(ExponentMode::ClosedForm);
    CHECK(e.zeta == doctest::Approx(zeta_floor()));
    CHECK(e.alpha == doctest::Approx(alpha_star()));
    // at the optimum tau equals the sewing-defect exponent
    CHECK(e.tau == doctest::Approx(e.beta2 * (e.beta2 - e.beta) / (e.beta2 + e.beta)).epsilon(1e-12));
  }

  TEST_CASE("grid search agrees with the closed form; quarter mode") {
    const ExponentResult g = optimal_exponent(ExponentMode::GridSearch);
    CHECK(std::abs(g.zeta - zeta_floor()) < 1e-3);
    CHECK(g.evaluations > 0);
    CHECK(g.beta >= 1.0 / 3.0);
    CHECK(g.beta < g.beta2);
    CHECK(g.beta2 < g.alpha);
    CHECK(optimal_exponent(ExponentMode::RemarkQuarter).zeta == doctest::Approx(0.25));
    for (auto m : {ExponentMode::ClosedForm, ExponentMode::GridSearch, ExponentMode::RemarkQuarter})
      CHECK(exponent_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(exponent_mode_from_string("best"), ConfigError);
  }

  TEST_CASE("experiment config validation") {
    CHECK_NOTHROW(ExperimentConfig{}.validate());
    auto c = small_config();
    CHECK_NOTHROW(c.validate());
    c.deltas = {0.25};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.delta_ref = 0.25;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.T = 0.3;
    CHECK_THROWS_AS(c.validate(), AlignmentError);
    c = small_config();
    c.resamples = 50;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.h = "sinc";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.seeds.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("small end-to-end run is deterministic and self-consistent") {
    const auto c = small_config();
    const ConvergenceReport a = run_end_to_end(c);
    REQUIRE(a.rows.size() == 3);
    for (const SeedRow& r : a.rows) {
      REQUIRE(r.values.size() == 3);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::isfinite(r.values[i]));
        CHECK(r.errors[i] == doctest::Approx(std::abs(r.values[i] - r.reference)));
        CHECK(r.rho[i] > 0.0);
      }
      CHECK(r.reference_shift == doctest::Approx(std::abs(r.reference_half - r.reference)));
      CHECK(std::abs(r.values[0]) <= 1.0);
    }
    CHECK(a.zeta == doctest::Approx(zeta_floor()));
    CHECK(a.median_errors.size() == 3);
    CHECK(a.passes_floor == (a.median_rate.one_sided_lo > a.zeta));
    auto threaded = c;
    threaded.jobs = 3;
    const ConvergenceReport b = run_end_to_end(threaded);
    for (std::size_t s = 0; s < 3; ++s) {
      CHECK(b.rows[s].seed == a.rows[s].seed);
      CHECK(b.rows[s].values == a.rows[s].values);
      CHECK(b.rows[s].reference == a.rows[s].reference);
    }
    CHECK(b.median_rate.median == a.median_rate.median);
    CHECK(b.median_rate.one_sided_lo == a.median_rate.one_sided_lo);
  }

  TEST_CASE("controlled distance study runs on a small configuration") {
    DistanceStudyConfig d;
    d.base = small_config();
    d.horizon = 0.125;
    d.time_points = 2;
    const DistanceStudy s = controlled_distance_study(d);
    REQUIRE(s.rows.size() == 4);
    CHECK(s.rows.back().delta == doctest::Approx(0.03125));
    CHECK(s.rows.back().d == 0.0);
    CHECK(s.d_by_seed.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(s.rows[i].d > 0.0);
      CHECK(s.rows[i].bound > s.rows[i].rho);
      CHECK(s.rows[i].ratio == doctest::Approx(s.rows[i].d / s.rows[i].bound));
    }
    CHECK(std::isfinite(s.pooled_C));
    d.time_points = 0;
    CHECK_THROWS_AS(controlled_distance_study(d), ConfigError);
  }

  TEST_CASE("errors shrink with delta over eight seeds; controlled distance follows its bound") {
    ExperimentConfig c = small_config();
    c.deltas = {0.25, 0.125, 0.0625, 0.03125};
    c.delta_ref = 1.0 / 128.0;
    c.window = 32.0;
    c.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    c.jobs = 0;
    const ConvergenceReport r = run_end_to_end(c);
    CHECK(r.median_errors_monotone);
    for (const SeedRow& row : r.rows) {
      int ups = 0;
      for (std::size_t i = 1; i < row.errors.size(); ++i) ups += row.errors[i] > row.errors[i - 1];
      CHECK(ups <= 1);
    }
    CHECK(r.passes_floor);
    MESSAGE("median rate " << r.median_rate.median << ", lower bound " << r.median_rate.one_sided_lo);

    DistanceStudyConfig d;
    d.base = c;
    d.horizon = 0.125;
    d.time_points = 2;
    const DistanceStudy s = controlled_distance_study(d);
    for (const auto& row : s.d_by_seed)
      for (double v : row) CHECK(v >= 0.0);
    CHECK(s.rows.back().d == 0.0);
    CHECK(s.monotone);
    CHECK(std::isfinite(s.pooled_C));
    CHECK(s.stable);
    MESSAGE("pooled C " << s.pooled_C << ", last octave C " << s.last_octave_C);
  }
}
