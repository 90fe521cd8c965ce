#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rwre/env.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

TEST_SUITE("env") {
  TEST_CASE("two-point environment takes the two declared values with equal frequency") {
    const auto spec = EnvironmentSpec::two_point(0.2, 0.15, 0.01);
    const Environment env = sample_environment(spec, 20000, 3);
    const double s2 = 0.8;
    std::int64_t high = 0;
    for (std::int64_t x = -20000; x <= 20000; ++x) {
      const double w = env.omega_plus[x];
      const bool lo = std::abs(w - (s2 / 2 - 0.15)) < 1e-15, hi = std::abs(w - (s2 / 2 + 0.15)) < 1e-15;
      REQUIRE((lo || hi));
      high += hi;
      CHECK(env.omega_minus(x) == doctest::Approx(s2 - w).epsilon(1e-15));
    }
    CHECK(static_cast<double>(high) / 40001.0 == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("sampling is a pure function of (seed, site)") {
    const EnvironmentSpec spec;
    const Environment a = sample_environment(spec, 50, 9), b = sample_environment(spec, 80, 9), c = sample_environment(spec, 50, 10);
    for (std::int64_t x = -50; x <= 50; ++x) CHECK(a.omega_plus[x] == b.omega_plus[x]);
    int same = 0;
    for (std::int64_t x = -50; x <= 50; ++x) same += a.omega_plus[x] == c.omega_plus[x];
    CHECK(same < 80);
  }

  TEST_CASE("invalid specs are rejected") {
    EnvironmentSpec s;
    s.epsilon = 1.2;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(EnvironmentSpec::two_point(0.2, 0.395, 0.01).validate(), ConfigError);
    CHECK_THROWS_AS(law_kind_from_string("gamma"), ConfigError);
    CHECK_THROWS_AS(sample_environment(EnvironmentSpec{}, -1, 0), ConfigError);
  }

  TEST_CASE("two-point xi law") {
    const auto spec = EnvironmentSpec::two_point_xi(0.2, 0.7, 0.01);
    const XiLaw law = XiLaw::from_spec(spec);
    CHECK(law.xi0() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(law.mean() == doctest::Approx(0.0));
    CHECK(law.variance() == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(law.cdf(-1.0) == 0.0);
    CHECK(law.cdf(0.0) == 0.5);
    CHECK(law.cdf(1.0) == 1.0);
    const Environment env = sample_environment(spec, 10, 1);
    for (std::int64_t x = -10; x <= 10; ++x) CHECK(std::abs(xi(env, x)) == doctest::Approx(0.7).epsilon(1e-13));
  }

  TEST_CASE("asymmetric truncated beta law is centred and matches quadrature") {
    const auto spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01);
    const XiLaw law = XiLaw::from_spec(spec);
    CHECK(std::abs(law.mean()) < 1e-12);
    // variance against a Simpson oracle on the truncation interval
    const double lo = law.b_lo(), hi = law.b_hi();
    auto pdf = [&](double b) { return oracle::beta_pdf(2.0, 3.0, b); };
    const double Z = oracle::simpson(pdf, lo, hi, 20000);
    const double m2 = oracle::simpson([&](double b) { const double x = std::log((1 - b) / b); return x * x * pdf(b); }, lo, hi, 20000) / Z;
    CHECK(law.variance() == doctest::Approx(m2).epsilon(1e-8));
    // quantile inverts the cdf, and the upper quantile is the mirrored branch
    for (double p : {0.01, 0.2, 0.5, 0.77, 0.999}) {
      CHECK(law.cdf(law.quantile(p)) == doctest::Approx(p).epsilon(1e-9));
      CHECK(law.quantile_upper(1.0 - p) == doctest::Approx(law.quantile(p)).epsilon(1e-9));
    }
  }

  TEST_CASE("sampled beta environment follows its law (KS)") {
    const auto spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 0.01);
    const XiLaw law = XiLaw::from_spec(spec);
    const Environment env = sample_environment(spec, 50000, 4);
    std::vector<double> xs;
    for (std::int64_t x = -50000; x <= 50000; ++x) xs.push_back(xi(env, x));
    CHECK(ks_statistic(xs, [&](double x) { return law.cdf(x); }) < 0.01);
  }

  TEST_CASE("rescaled fields follow their definitions") {
    const EnvironmentSpec spec;
    const Environment env = sample_environment(spec, 100, 5);
    const RescaledEnvironment one = rescale_environment(env, 1.0);
    for (std::int64_t x = -100; x <= 100; ++x) CHECK(one.omega_plus[x] == env.omega_plus[x]);
    const double d = 1.0 / 64.0, s2 = spec.sigma2();
    const RescaledEnvironment r = rescale_environment(env, d);
    for (std::int64_t x = -100; x <= 100; ++x) {
      const double w = s2 / (1.0 + std::exp(std::sqrt(d) * xi(env, x)));
      CHECK(r.omega_plus[x] == doctest::Approx(w).epsilon(1e-14));
      CHECK(r.u_dot[x] == doctest::Approx(2 * w - s2).epsilon(1e-12));
      CHECK(r.u_bar[x] == doctest::Approx(-2 * r.u_dot[x]).epsilon(1e-14));
      CHECK(r.u_bar1[x] == doctest::Approx(r.u_bar[x] - r.u_bar2).epsilon(1e-14));
    }
    CHECK_THROWS_AS(rescale_environment(env, 0.0), ConfigError);
  }

  TEST_CASE("variance of u_bar scales like delta sigma^4 Var(xi)") {
    const EnvironmentSpec spec;
    const double d = 1.0 / 1024.0;
    const RescaledEnvironment r = rescale_environment(sample_environment(spec, 100000, 6), d);
    double m = 0.0, q = 0.0;
    for (double v : r.u_bar.v) m += v;
    m /= static_cast<double>(r.u_bar.size());
    for (double v : r.u_bar.v) q += (v - m) * (v - m);
    q /= static_cast<double>(r.u_bar.size() - 1);
    CHECK(q / d == doctest::Approx(brownian_variance(spec)).epsilon(0.02));
  }

  TEST_CASE("u_bar2 matches quadrature and its leading constant") {
    const auto spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01);
    const XiLaw law = XiLaw::from_spec(spec);
    const double s2 = spec.sigma2(), d = 1.0 / 16.0;
    const double lo = law.b_lo(), hi = law.b_hi();
    auto pdf = [&](double b) { return oracle::beta_pdf(2.0, 3.0, b); };
    const double Z = oracle::simpson(pdf, lo, hi, 20000);
    const double e = oracle::simpson([&](double b) { return std::tanh(std::sqrt(d) * std::log((1 - b) / b) / 2) * pdf(b); }, lo, hi, 20000) / Z;
    CHECK(u_bar2(spec, d) == doctest::Approx(2 * s2 * e).epsilon(1e-5));
    const double c = u_bar2_leading_constant(law, s2);
    const double dd = std::ldexp(1.0, -16);
    CHECK(u_bar2(spec, dd) / std::pow(dd, 1.5) == doctest::Approx(c).epsilon(1e-3));
    CHECK(u_bar2(EnvironmentSpec{}, d) == 0.0);
  }

  TEST_CASE("noise-driven environment reproduces its field; mirror flips it") {
    SiteVector field(-5, 11);
    for (std::int64_t k = -5; k <= 5; ++k) field[k] = 0.01 * static_cast<double>(k);
    const RescaledEnvironment r = RescaledEnvironment::from_noise(0.2, 0.25, field);
    for (std::int64_t k = -5; k <= 5; ++k) CHECK(r.u_bar[k] == doctest::Approx(field[k]).epsilon(1e-14));
    CHECK(r.clamped_sites == 0);
    const RescaledEnvironment m = r.mirrored();
    for (std::int64_t k = -5; k <= 5; ++k) CHECK(m.u_dot[k] == doctest::Approx(-r.u_dot[-k]).epsilon(1e-14));
    SiteVector big(0, 1, 10.0);
    CHECK(RescaledEnvironment::from_noise(0.2, 0.25, big).clamped_sites == 1);
  }

  TEST_CASE("piecewise-linear noise path") {
    SiteVector field(-3, 7);
    for (std::int64_t k = -3; k <= 3; ++k) field[k] = 1.0 + 0.5 * static_cast<double>(k);
    const PiecewiseLinearPath P = interpolate_noise(field, 0.5);
    CHECK(P(0.0) == 0.0);
    for (std::int64_t k = -2; k <= 3; ++k) CHECK(P.at_site(k) - P.at_site(k - 1) == doctest::Approx(field[k]));
    CHECK(P(0.25) == doctest::Approx(0.5 * field[1]));
    CHECK(P.x_min() == doctest::Approx(-2.0));
    CHECK_THROWS_AS(P(2.0), RangeError);
    CHECK_THROWS_AS(P(-2.5), RangeError);
  }

  TEST_CASE("xi values, single-site window, centred sample mean") {
    Environment e;
    e.omega_plus = SiteVector(0, 2);
    e.omega_plus[0] = 0.4;
    e.omega_plus[1] = 0.8 / (1.0 + std::exp(1.0));
    CHECK(xi(e, 0) == 0.0);
    CHECK(xi(e, 1) == doctest::Approx(1.0).epsilon(1e-14));
    const Environment one = sample_environment(EnvironmentSpec{}, 0, 5);
    CHECK(one.omega_plus.size() == 1);
    CHECK(std::isfinite(one.omega_plus.at(0)));
    const EnvironmentSpec spec;
    const Environment big = sample_environment(spec, 500000, 6);
    double m = 0.0;
    for (double w : big.omega_plus.v) {
      REQUIRE(w > 0.0);
      REQUIRE(w < spec.sigma2());
      m += std::log((spec.sigma2() - w) / w);
    }
    const double n = static_cast<double>(big.omega_plus.size());
    CHECK(std::abs(m / n) < 4.0 * std::sqrt(XiLaw::from_spec(spec).variance() / n));
  }

  TEST_CASE("flat noise gives the symmetric walk; rescaled rates stay inside (0, sigma2)") {
    const RescaledEnvironment flat = RescaledEnvironment::from_noise(0.2, 0.125, SiteVector(-4, 9));
    for (double w : flat.omega_plus.v) CHECK(w == doctest::Approx(0.4).epsilon(1e-15));
    const auto spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01);
    const Environment env = sample_environment(spec, 2000, 7);
    for (double d : {1.0, 0.25, 1.0 / 1024.0}) {
      const RescaledEnvironment r = rescale_environment(env, d);
      for (std::int64_t x = -2000; x <= 2000; ++x) {
        CHECK(r.omega_plus[x] > 0.0);
        CHECK(r.omega_plus[x] < 0.8);
      }
    }
  }

  TEST_CASE("u_dot carries a quarter of the Brownian variance, u_bar all of it") {
    const EnvironmentSpec spec;
    const double d = std::ldexp(1.0, -10);
    const RescaledEnvironment r = rescale_environment(sample_environment(spec, 500000, 8), d);
    auto var = [](const std::vector<double>& v) {
      double m = 0.0, q = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      for (double x : v) q += (x - m) * (x - m);
      return q / static_cast<double>(v.size() - 1);
    };
    const double target = brownian_variance(spec);
    CHECK(target == doctest::Approx(spec.sigma2() * spec.sigma2() * XiLaw::from_spec(spec).variance()).epsilon(1e-14));
    CHECK(var(r.u_bar.v) / d == doctest::Approx(target).epsilon(0.05));
    CHECK(var(r.u_dot.v) / d == doctest::Approx(target / 4).epsilon(0.05));
  }

  TEST_CASE("noise path: midpoints and constant fields") {
    const double d = 0.25;
    SiteVector c(-4, 9, 0.3);
    const PiecewiseLinearPath P = interpolate_noise(c, d);
    for (std::int64_t k = -3; k <= 4; ++k) CHECK(P.at_site(k) == doctest::Approx(0.3 / d * static_cast<double>(k) * d).epsilon(1e-14));
    SiteVector f(-4, 9);
    for (std::int64_t k = -4; k <= 4; ++k) f[k] = std::sin(static_cast<double>(k));
    const PiecewiseLinearPath Q = interpolate_noise(f, d);
    for (std::int64_t k = -3; k < 4; ++k)
      CHECK(Q((static_cast<double>(k) + 0.5) * d) == doctest::Approx(0.5 * (Q.at_site(k) + Q.at_site(k + 1))).epsilon(1e-14));
  }
}
