#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "rwre/kernel.hpp"

using namespace rwre;

TEST_SUITE("kernel") {
  TEST_CASE("table rows match direct convolution") {
    const KernelTable t(0.2, 60, 60);
    for (int n : {0, 1, 2, 7, 33, 60}) {
      const auto row = oracle::lazy_walk_row(0.2, n);
      for (int k = -n; k <= n; ++k) CHECK(t.p(n, k) == doctest::Approx(static_cast<double>(row[static_cast<std::size_t>(k + n)])).epsilon(1e-13));
      CHECK(t.p(n, n + 1) == 0.0);
      CHECK(t.row_sum(n) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(t.p(1, 0) == doctest::Approx(0.2));
    CHECK(t.p(1, 1) == doctest::Approx(0.4));
    CHECK_THROWS_AS(t.p(61, 0), RangeError);
    CHECK_THROWS_AS(KernelTable(0.2, 10, 5), ConfigError);
  }

  TEST_CASE("rescaled kernel is aligned to the grid") {
    const KernelTable t(0.2, 64, 64);
    const RescaledKernel r(t, 0.25);
    CHECK(r.p_hat(0.0625 * 3, 0.5) == doctest::Approx(t.p(3, 2) / 0.25));
    CHECK_THROWS_AS(r.p_hat(0.1, 0.5), AlignmentError);
    CHECK_THROWS_AS(r.p_hat(0.0625, 0.3), AlignmentError);
  }

  TEST_CASE("difference stencils are exact on polynomials") {
    auto cube = [](std::int64_t k) { const double x = 0.5 * static_cast<double>(k); return x * x * x; };
    auto quart = [](std::int64_t k) { const double x = 0.5 * static_cast<double>(k); return x * x * x * x; };
    CHECK(grad(2, cube, 3, 0.5) == doctest::Approx(6.0 * 1.5));
    CHECK(grad(3, cube, 3, 0.5) == doctest::Approx(6.0));
    CHECK(grad(4, quart, 2, 0.5) == doctest::Approx(24.0));
    CHECK(grad_centered(cube, 2, 0.5) == doctest::Approx(3.0 + 0.25));
    CHECK_THROWS_AS(grad(5, cube, 0), ConfigError);
  }

  TEST_CASE("gaussian kernel") {
    CHECK(gaussian_kernel(2.0, 0.0, 0.8) == doctest::Approx(1.0 / std::sqrt(2 * M_PI * 1.6)));
    CHECK(gaussian_kernel(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-0.5) / std::sqrt(2 * M_PI)));
    CHECK_THROWS(gaussian_kernel(0.0, 1.0, 1.0));
  }

  TEST_CASE("local CLT error decays at the expected rates") {
    const KernelTable t(0.2, 1024, 1024);
    const double r0 = lclt_error(t, 512, 0) / lclt_error(t, 1024, 0);
    const double r2 = lclt_error(t, 512, 2) / lclt_error(t, 1024, 2);
    CHECK(std::log2(r0) == doctest::Approx(1.5).epsilon(0.05));
    CHECK(std::log2(r2) == doctest::Approx(2.5).epsilon(0.05));
    CHECK_THROWS_AS(lclt_error(t, 8, 1), ConfigError);
  }

  TEST_CASE("bound scan: finite for small b, overflow reported for large b") {
    const KernelTable t(0.2, 256, 256);
    const BoundScan ok = gaussian_bound_scan(t, 2, 1.0 / (8 * 0.8), 256);
    CHECK_FALSE(ok.overflow);
    CHECK(std::isfinite(ok.value));
    CHECK(ok.last_octave_growth() < 0.05);
    const BoundScan bad = gaussian_bound_scan(t, 0, 1000.0, 256);
    CHECK(bad.overflow);
    CHECK(std::isinf(bad.value));
    CHECK(bad.arg_n > 0);
  }

  TEST_CASE("binary export round trip") {
    const KernelTable t(0.3, 4, 6);
    t.export_binary("kernel_rt.bin", "kernel_rt.json");
    std::ifstream js("kernel_rt.json");
    const auto j = nlohmann::json::parse(js);
    CHECK(j["N"] == 4);
    CHECK(j["K"] == 6);
    std::ifstream bin("kernel_rt.bin", std::ios::binary);
    std::vector<double> v(5 * 13);
    bin.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    CHECK(bin.gcount() == static_cast<std::streamsize>(v.size() * sizeof(double)));
    CHECK(v[3 * 13 + 6 + 2] == doctest::Approx(t.p(3, 2)));
    std::remove("kernel_rt.bin");
    std::remove("kernel_rt.json");
  }

  TEST_CASE("two-step law, symmetry, support, Chapman-Kolmogorov") {
    const double e = 0.3;
    const KernelTable t(e, 40, 40);
    CHECK(t.p(2, 0) == doctest::Approx(e * e + (1 - e) * (1 - e) / 2).epsilon(1e-15));
    for (int n = 1; n <= 40; ++n) {
      CHECK(std::abs(t.row_sum(n) - 1.0) < 1e-12);
      for (int k = 0; k <= n; ++k) {
        CHECK(t.p(n, k) == t.p(n, -k));
        CHECK(t.p(n, k) > 0.0);
      }
      CHECK(t.p(n, n + 1) == 0.0);
    }
    double worst = 0.0;
    for (int k = -16; k <= 16; ++k) {
      double c = 0.0;
      for (int j = -7; j <= 7; ++j) c += t.p(7, j) * t.p(9, k - j);
      worst = std::max(worst, std::abs(c - t.p(16, k)));
    }
    CHECK(worst < 1e-12);
  }

  TEST_CASE("gaussian kernel: normalization, peak, heat equation") {
    const double s2 = 0.8;
    const double mass = oracle::simpson([&](double x) { return gaussian_kernel(1.0, x, s2); }, -20.0, 20.0, 20000);
    CHECK(std::abs(mass - 1.0) < 1e-10);
    CHECK(gaussian_kernel(1.0, 0.0, s2) == doctest::Approx(1.0 / std::sqrt(2 * M_PI * s2)).epsilon(1e-15));
    const double h = 1e-3, t0 = 1.0, x0 = 0.5;
    const double dt = (gaussian_kernel(t0 + h, x0, s2) - gaussian_kernel(t0 - h, x0, s2)) / (2 * h);
    const double dxx = (gaussian_kernel(t0, x0 + h, s2) + gaussian_kernel(t0, x0 - h, s2) - 2 * gaussian_kernel(t0, x0, s2)) / (h * h);
    CHECK(std::abs(dt - 0.5 * s2 * dxx) < 1e-6);
  }

  TEST_CASE("rescaled kernel: initial mass, normalization, discrete heat equation") {
    const KernelTable t(0.2, 64, 64);
    const double d = 0.125, s2 = t.sigma2();
    const RescaledKernel r(t, d);
    CHECK(r.p_hat(0.0, 0.0) == doctest::Approx(1.0 / d));
    for (int j = 0; j <= 64; j += 8) {
      double s = 0.0;
      for (int k = -j; k <= j; ++k) s += r.p_hat_index(j, k);
      CHECK(std::abs(d * s - 1.0) < 1e-12);
    }
    double worst = 0.0;
    for (int j = 0; j < 64; ++j)
      for (int k = -j - 1; k <= j + 1; ++k) {
        auto f = [&](std::int64_t x) { return r.p_hat_index(j, x); };
        const double dtp = (r.p_hat_index(j + 1, k) - r.p_hat_index(j, k)) / (d * d);
        worst = std::max(worst, std::abs(dtp - 0.5 * s2 * grad(2, f, k, d)));
      }
    CHECK(worst < 1e-12 * 1.0 / (d * d * d));
    const RescaledKernel one(t, 1.0);
    for (int k = -5; k <= 5; ++k) CHECK(one.p_hat(5.0, static_cast<double>(k)) == t.p(5, k));
  }

  TEST_CASE("bound scan: large b blows up at m=2, m=0 stays finite for small b") {
    const KernelTable t(0.2, 512, 512);
    CHECK(gaussian_bound_scan(t, 2, 10.0).overflow);
    const BoundScan z = gaussian_bound_scan(t, 0, 1.0 / (8 * 0.8));
    CHECK_FALSE(z.overflow);
    CHECK(std::isfinite(z.value));
    CHECK(lclt_error(t, 512, 0) < lclt_error(t, 64, 0));
  }
}
