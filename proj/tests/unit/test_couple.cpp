#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rwre/couple.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

namespace {

std::vector<double> gaussians(std::size_t n, double sd, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return v;
}

struct RhoStudies {
  CouplingStudy gauss, dyadic, per_step;
};

// Shared by the rho-rate cases below; computed once.
const RhoStudies& rho_studies() {
  static const RhoStudies st = [] {
    WeightParams p;
    p.alpha = 0.4;
    p.beta = 0.34;
    p.beta2 = 0.38;
    p.chi = 0.12;
    p.radii = {1.0};
    const std::vector<double> deltas{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    CouplingStudyConfig cfg;
    cfg.window = 1.0;
    cfg.resamples = 200;
    cfg.jobs = 0;
    RhoStudies r;
    r.gauss = coupling_rate_study(Coupler(XiLaw::gaussian(0.7), 0.8, CouplerKind::Dyadic), p, deltas, seeds, cfg);
    r.dyadic = coupling_rate_study(Coupler(XiLaw::two_point(0.7), 0.8, CouplerKind::Dyadic), p, deltas, seeds, cfg);
    r.per_step = coupling_rate_study(Coupler(XiLaw::two_point(0.7), 0.8, CouplerKind::PerStep), p, deltas, seeds, cfg);
    return r;
  }();
  return st;
}

XiLaw centred_beta() { return XiLaw::from_spec(EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01)); }

}  // namespace

TEST_SUITE("couple") {
  TEST_CASE("Brownian grid: W(0) = 0, cumulative increments, variance") {
    const BrownianGrid W = sample_brownian(0.7, 1.0 / 64.0, 2.0, 3);
    CHECK(W.K == 128);
    CHECK(W.values[0] == 0.0);
    double s = 0.0;
    for (std::int64_t k = 1; k <= W.K; ++k) CHECK(W.values[k] == doctest::Approx(s += W.increments[k]).epsilon(1e-13));
    s = 0.0;
    for (std::int64_t k = 0; k > -W.K; --k) CHECK(W.values[k - 1] == doctest::Approx(s -= W.increments[k]).epsilon(1e-13));
    CHECK(W.ratio(1.0 / 16.0) == 4);
    CHECK_THROWS_AS(W.ratio(0.1), AlignmentError);
    const SiteVector c = W.coarse_increments(0.25);
    CHECK(c.lo == -7);
    CHECK(c.hi() == 8);
    CHECK(c[3] == doctest::Approx(W.values[48] - W.values[32]).epsilon(1e-13));
    CHECK(c[-2] == doctest::Approx(W.values[-32] - W.values[-48]).epsilon(1e-13));
    double q = 0.0;
    const int S = 4000;
    for (int i = 0; i < S; ++i) {
      const double w = sample_brownian(0.7, 1.0 / 8.0, 1.0, 100 + static_cast<std::uint64_t>(i)).values[8];
      q += w * w;
    }
    CHECK(q / S == doctest::Approx(0.7).epsilon(4.0 * std::sqrt(2.0 / S)));
    CHECK_THROWS_AS(sample_brownian(0.0, 0.1, 1.0, 1), ConfigError);
  }

  TEST_CASE("coupler kinds parse and print") {
    for (auto k : {CouplerKind::PerStep, CouplerKind::Dyadic}) CHECK(coupler_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(coupler_kind_from_string("kmt"), ConfigError);
  }

  TEST_CASE("coupled sequences have the target marginal law") {
    const double s2 = 0.8;
    for (const XiLaw& law : {XiLaw::two_point(0.7), centred_beta()}) {
      for (auto kind : {CouplerKind::PerStep, CouplerKind::Dyadic}) {
        CAPTURE(to_string(kind));
        const Coupler c(law, s2, kind);
        CHECK(c.tau() == doctest::Approx(s2 * std::sqrt(law.variance())));
        const auto g = gaussians(1 << 16, c.tau(), 21);
        const auto x = c.map(g, 5);
        std::vector<double> xi(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
          xi[i] = x[i] / s2;
          if (law.is_lattice()) {  // snap onto the atoms before comparing cdfs
            REQUIRE(std::abs(std::abs(xi[i]) - law.xi0()) < 1e-12);
            xi[i] = std::copysign(law.xi0(), xi[i]);
          }
        }
        CHECK(ks_statistic(xi, [&](double t) { return law.cdf(t); }) < 0.01);
        CHECK(c.map(g, 5) == x);
      }
    }
  }

  TEST_CASE("two-point coupling ignores the auxiliary stream; binned laws use it") {
    const auto g = gaussians(256, 0.5, 2);
    const Coupler tp(XiLaw::two_point(0.6), 0.8, CouplerKind::Dyadic);
    CHECK(tp.map(g, 1) == tp.map(g, 2));
    const Coupler bt(centred_beta(), 0.8, CouplerKind::Dyadic);
    CHECK(bt.map(g, 1) != bt.map(g, 2));
  }

  TEST_CASE("Gaussian law is coupled by the identity") {
    const Coupler c(XiLaw::gaussian(1.3), 0.8, CouplerKind::Dyadic);
    const auto g = gaussians(1000, c.tau(), 3);
    CHECK(max_partial_sum_deviation(c.map(g), g) < 1e-11);
  }

  TEST_CASE("partial-sum deviation") {
    CHECK(max_partial_sum_deviation({1.0, -2.0, 0.5}, {0.0, 0.0, 0.0}) == 1.0);
    CHECK(max_partial_sum_deviation({1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}) == 1.5);
    CHECK_THROWS_AS(max_partial_sum_deviation({1.0}, {}), ConfigError);
  }

  TEST_CASE("dyadic deviation grows much slower than per-step") {
    const XiLaw law = XiLaw::two_point(0.7);
    const DeviationGrowth d = deviation_growth(Coupler(law, 0.8, CouplerKind::Dyadic), 6, 14, 9);
    const DeviationGrowth p = deviation_growth(Coupler(law, 0.8, CouplerKind::PerStep), 6, 14, 9);
    CHECK(d.n.size() == 9);
    CHECK(d.n.front() == 64.0);
    CHECK(d.max_dev.back() < p.max_dev.back());
    CHECK(d.slope_log < p.slope_log);
    CHECK_THROWS_AS(deviation_growth(Coupler(law, 0.8, CouplerKind::Dyadic), 3, 3, 1), ConfigError);
  }

  TEST_CASE("coupled field assembles the noise decomposition") {
    const auto spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01);
    const Coupler c(XiLaw::from_spec(spec), 0.8, CouplerKind::Dyadic);
    const BrownianGrid W = sample_brownian(c.tau() * c.tau(), 1.0 / 128.0, 2.0, 4);
    const double d = 1.0 / 32.0;
    const CoupledField f = couple(W, d, 0.2, c, 7);
    CHECK(f.X.lo == -63);
    CHECK(f.X.hi() == 64);
    CHECK(f.u_bar2 == doctest::Approx(u_bar2(spec, d)));
    const RescaledEnvironment r = f.environment();
    for (std::int64_t k = f.X.lo; k <= f.X.hi(); ++k) {
      CHECK(f.xi[k] == doctest::Approx(f.X[k] / 0.8));
      CHECK(r.omega_plus[k] == doctest::Approx(0.8 / (1.0 + std::exp(std::sqrt(d) * f.xi[k]))).epsilon(1e-14));
      CHECK(f.u_bar11[k] == doctest::Approx(std::sqrt(d) * f.X[k]));
      CHECK(f.u_bar11[k] + f.u_bar12[k] == doctest::Approx(r.u_bar[k] - f.u_bar2).epsilon(1e-13));
    }
    const CoupledField again = couple(W, d, 0.2, c, 7);
    CHECK(again.X.v == f.X.v);
    CHECK_THROWS_AS(couple(W, d, 0.3, c), ConfigError);
    CHECK_THROWS_AS(couple(sample_brownian(1.0, 1.0 / 128.0, 2.0, 4), d, 0.2, c), ConfigError);
    CHECK_THROWS_AS(couple(W, 0.03, 0.2, c), AlignmentError);
  }

  TEST_CASE("lift distance and rate study inputs") {
    const Coupler c(XiLaw::two_point(0.7), 0.8, CouplerKind::Dyadic);
    const BrownianGrid W = sample_brownian(c.tau() * c.tau(), 1.0 / 64.0, 4.0, 4);
    WeightParams p;
    p.alpha = 0.4;
    p.beta = 0.34;
    p.beta2 = 0.38;
    p.chi = 0.12;
    p.radii = {1.0, 2.0};
    const CoupledField f = couple(W, 1.0 / 16.0, 0.2, c);
    const LiftDistance l = coupled_lift_distance(W, f, p, 1.0 / 64.0);
    CHECK(l.rho > 0.0);
    CHECK(l.per_radius.size() == 2);
    CHECK_THROWS_AS(coupled_lift_distance(W, f, p, 0.05), AlignmentError);
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    CHECK_THROWS_AS(coupling_rate_study(c, p, {0.25, 0.125, 0.0625, 0.03125}, seeds, {}), ConfigError);
  }

  TEST_CASE("rate study results do not depend on the job count") {
    const Coupler c(centred_beta(), 0.8, CouplerKind::Dyadic);
    WeightParams p;
    p.alpha = 0.4;
    p.beta = 0.34;
    p.beta2 = 0.38;
    p.chi = 0.12;
    p.radii = {1.0};
    const std::vector<double> deltas{0.25, 0.125, 0.0625, 0.03125};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    CouplingStudyConfig cfg;
    cfg.window = 2.0;
    cfg.resamples = 200;
    const CouplingStudy one = coupling_rate_study(c, p, deltas, seeds, cfg);
    cfg.jobs = 4;
    const Coupler fresh(centred_beta(), 0.8, CouplerKind::Dyadic);  // empty sum-law cache, filled concurrently
    const CouplingStudy four = coupling_rate_study(fresh, p, deltas, seeds, cfg);
    CHECK(one.rho == four.rho);
    CHECK(one.max_dev == four.max_dev);
    CHECK(one.fit.slope == four.fit.slope);
  }

  TEST_CASE("Brownian scaling: coarse increments over sqrt(delta) have variance tau2") {
    const double tau2 = 0.6, d = 1.0 / 16.0;
    const BrownianGrid W = sample_brownian(tau2, 1.0 / 128.0, 64.0, 31);
    const SiteVector c = W.coarse_increments(d);
    double q = 0.0;
    for (double v : c.v) q += v * v / d;
    q /= static_cast<double>(c.size());
    CHECK(q == doctest::Approx(tau2).epsilon(4.0 * std::sqrt(2.0 / static_cast<double>(c.size()))));
    double v1 = 0.0;
    const int S = 10000;
    for (int i = 0; i < S; ++i) {
      const double w = sample_brownian(tau2, 1.0 / 4.0, 1.0, 5000 + static_cast<std::uint64_t>(i)).values[4];
      v1 += w * w;
    }
    CHECK(v1 / S == doctest::Approx(tau2).epsilon(0.05));
  }

  TEST_CASE("Gaussian law is the identity in both modes") {
    for (auto kind : {CouplerKind::PerStep, CouplerKind::Dyadic}) {
      const Coupler c(XiLaw::gaussian(0.9), 0.8, kind);
      const auto g = gaussians(1 << 14, c.tau(), 32);
      CHECK(max_partial_sum_deviation(c.map(g), g) <= 1e-10);
    }
  }

  TEST_CASE("lift distance: Gaussian control shrinks at the interpolation rate, two-point decreases in delta") {
    const RhoStudies& st = rho_studies();
    for (const auto& row : st.gauss.rho)
      for (double r : row) CHECK(r >= 0.0);
    CHECK(st.gauss.fit.slope >= 0.9 * (0.5 - 0.4));
    CHECK(st.gauss.fit.metrics.back() < st.gauss.fit.metrics.front());
    CHECK(st.dyadic.fit.slope > 0.0);
    int ups = 0;
    for (std::size_t i = 1; i < st.dyadic.fit.metrics.size(); ++i) ups += st.dyadic.fit.metrics[i] > st.dyadic.fit.metrics[i - 1];
    CHECK(ups <= 1);
    MESSAGE("rho slopes: gaussian " << st.gauss.fit.slope << ", dyadic " << st.dyadic.fit.slope << ", per-step "
                                    << st.per_step.fit.slope);
    CHECK(st.per_step.fit.slope < st.dyadic.fit.slope);
  }

  // Paired per-seed slope gap; its bootstrap interval is expected to exclude 0.
  TEST_CASE("dyadic rho slope exceeds per-step beyond the paired interval" * doctest::may_fail()) {
    const RhoStudies& st = rho_studies();
    std::vector<double> lx, gaps;
    for (double d : st.dyadic.deltas) lx.push_back(std::log(d));
    for (std::size_t s = 0; s < st.dyadic.seeds.size(); ++s) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        a.push_back(std::log(st.dyadic.rho[s][i]));
        b.push_back(std::log(st.per_step.rho[s][i]));
      }
      gaps.push_back(least_squares(lx, a).slope - least_squares(lx, b).slope);
    }
    const MedianSummary m = bootstrap_median(gaps, 2000, 3);
    MESSAGE("paired slope gap median " << m.median << ", interval [" << m.ci_lo << ", " << m.ci_hi << "]");
    CHECK(m.ci_lo > 0.0);
  }
}
