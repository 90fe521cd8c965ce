#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/env.hpp"

namespace rwre {

// Scalar path on the grid step*Z with its canonical level-2 lift.
struct GridRoughPath {
  double step = 1.0;
  SiteVector values;  // X(k step)

  double x(std::int64_t k) const { return static_cast<double>(k) * step; }
  double x1(std::int64_t i, std::int64_t j) const { return values[j] - values[i]; }
  double x2(std::int64_t i, std::int64_t j) const {
    const double d = values[j] - values[i];
    return 0.5 * d * d;
  }
};

GridRoughPath lift(const SiteVector& values, double step);
// Samples a piecewise-linear path on sites [lo, hi] of the grid `step`.
GridRoughPath lift(const PiecewiseLinearPath& path, double step, std::int64_t lo, std::int64_t hi);

// max |X2(s,t) - X2(s,u) - X2(u,t) - X1(s,u) X1(u,t)| over all grid triples.
double chen_max_residual(const GridRoughPath& rp);

struct HolderResult {
  double value = 0.0;
  bool banded = false;  // only pairs with |j - i| <= n/4 were scanned
};

// Exact scans up to this many points; banded above.
inline constexpr std::int64_t kExactHolderPoints = 4096;

// sup over grid pairs i < j in [i0, i1] of |incr(i, j)| / ((j - i) step)^exponent.
HolderResult holder_norm(const std::function<double(std::int64_t, std::int64_t)>& incr, double step, std::int64_t i0,
                         std::int64_t i1, double exponent);
// Same for a path's level-1 increments on [-a, a].
HolderResult holder_norm(const GridRoughPath& rp, double exponent, double a);

// Site range of the grid inside [-a, a], clipped to the path's window; throws if
// the window does not cover [-a, a] up to one grid step.
std::pair<std::int64_t, std::int64_t> window_sites(const GridRoughPath& rp, double a);

struct WeightedResult {
  double value = 0.0;
  std::vector<double> per_radius;  // the bracket for each radius
  bool banded = false;
};

// sup_a ( ||X1||_alpha / a^chi + ||X2||_{2 alpha} / a^{2 chi} ) over the radii.
WeightedResult kappa_weighted(const GridRoughPath& rp, double alpha, double chi, const std::vector<double>& radii);
// sup_a ( ||A1 - B1||_alpha / a^chi + ||A2 - B2||_{2 alpha} / a^{2 chi} ).
WeightedResult rho_distance(const GridRoughPath& A, const GridRoughPath& B, double alpha, double chi,
                            const std::vector<double>& radii);

// Path v with declared derivative dv relative to X; all on X's grid.
struct GridControlledPath {
  SiteVector v, dv;
  const GridRoughPath* X = nullptr;
  double remainder(std::int64_t i, std::int64_t j) const { return v[j] - v[i] - dv[i] * X->x1(i, j); }
};

// sum over adjacent grid pairs in [i, j] of Y(u) X1(u,v) + dY(u) X2(u,v).
double rough_integral(const GridControlledPath& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j);
// sum over adjacent grid pairs of (Y(u) + Y(v))/2 X1(u,v).
double trapezoidal_sum(const GridControlledPath& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j);
double trapezoidal_sum(const SiteVector& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j);

// 2^mu zeta(mu).
double sewing_constant(double mu);

struct SewingReport {
  double remainder_norm = 0.0;  // ||R||_mu, R = sum of germ over adjacent pairs minus germ
  double bound = 0.0;           // c_mu ||delta R||_mu
  double ratio = 0.0;           // remainder_norm / ||delta R||_mu
  bool pass = false;
};
// Germ on index pairs of a grid with `n` points and spacing `step`.
SewingReport sewing_check(const std::function<double(std::int64_t, std::int64_t)>& germ, std::int64_t n, double step,
                          double mu);

struct GermBoundReport {
  double max_ratio = 0.0;  // max over pairs of |trap - germ| / bound(pair); <= 1 passes
  bool pass = false;
};
// |trapezoid - Y(x) X1 - dY(x) X2| <= c_mu ||delta Xi'||_mu |y-x|^mu + ||R||_{2beta} ||X||_alpha |y-x|^{alpha+2beta} / 2
// with Xi' the trapezoid germ and mu = alpha + 2 beta.
GermBoundReport germ_bound_check(const GridControlledPath& Y, const GridRoughPath& X, double alpha, double beta);

struct WeightParams {
  double alpha = 0.45, beta = 0.34, beta2 = 0.42, chi = 0.07;
  double theta = 2.5, theta2 = 2.0, lambda = 4.0;
  std::vector<double> radii{1.0, 2.0, 4.0};
  double T = 1.0;
  double gamma() const { return (alpha - beta) / 4.0; }
  void validate() const;
};

// Space-time controlled field on a common grid: times[m], sites lo..hi of step.
struct SpaceTimeControlled {
  double step = 1.0;
  std::int64_t lo = 0, hi = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> v, dv;  // [m][k - lo]
  SiteVector X;                            // reference path on the same sites
  double remainder(std::size_t m, std::int64_t i, std::int64_t j) const {
    const auto a = static_cast<std::size_t>(i - lo), b = static_cast<std::size_t>(j - lo);
    return v[m][b] - v[m][a] - dv[m][a] * (X[j] - X[i]);
  }
};

double weight_E(double theta, double lambda, double a, double t);
// Q(a,t)^{-1}, zero at t = 0.
double weight_Q_inv(double chi, double beta, double a, double t);

struct ControlledDistance {
  double joint = 0.0;                 // sup over (a, t)
  std::vector<double> per_radius;     // sup over t for each a
  double arg_a = 0.0, arg_t = 0.0;
  // components at the maximizer
  double value_part = 0.0, derivative_part = 0.0, remainder_part = 0.0;
};

// Weighted distance between two controlled fields; B may be null (norm of A).
ControlledDistance controlled_distance(const SpaceTimeControlled& A, const SpaceTimeControlled* B, const WeightParams& p);

}  // namespace rwre
