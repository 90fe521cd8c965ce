#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/env.hpp"
#include "rwre/kernel.hpp"

namespace rwre {

using InitialFn = std::function<double(double)>;        // f0(x)
using ForcingFn = std::function<double(double, double)>;  // g(t, x); empty means zero

// Values f_{t_j}(k delta) for stored time indices. Each slice carries its own
// site range (the dependency cone shrinks with time).
struct GridFunction {
  double delta = 1.0;
  std::int64_t N = 0;
  std::vector<std::int64_t> time_index;  // stored time indices, increasing
  std::vector<SiteVector> slices;

  std::size_t slot(std::int64_t j) const;
  double at(std::int64_t j, std::int64_t k) const { return slices[slot(j)].at(k); }
  const SiteVector& slice(std::int64_t j) const { return slices[slot(j)]; }
  bool has_time(std::int64_t j) const;

  // Binary f64 slices on the common site range [-A, A] plus JSON sidecar {delta,N,window}.
  void export_binary(const std::string& bin_path, const std::string& json_path, std::int64_t A) const;
};

// Built-in initial data and test functions.
namespace fns {
InitialFn gaussian_bump(double center = 0.0, double width = 1.0);
InitialFn cosine(double freq = 1.0);
InitialFn compact_bump(double radius = 1.0);
InitialFn polynomial(double c0, double c1 = 0.0, double c2 = 0.0, double c3 = 0.0);
InitialFn x_gauss();  // x exp(-x^2)
InitialFn by_name(const std::string& name);
}  // namespace fns

// Exact forward recursion f_{j+1} = T f_j + delta^2 g_j on the dependency cone of
// the output window [-A, A] (sites). Slice j covers [-A-N+j, A+N-j].
GridFunction solve_direct(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                          std::int64_t A);

// Same recursion on the fixed window [-A-margin, A+margin] with the edge sites
// frozen at their initial values; only the window [-A-1, A+1] is kept, every
// `stride` steps (and at N). The error against the exact cone solution is at most
// 2 sup|f| times the probability of an N-step walk moving `margin` sites.
GridFunction solve_direct_windowed(const RescaledEnvironment& renv, const InitialFn& f0, std::int64_t N, std::int64_t A,
                                   std::int64_t margin, std::int64_t stride);
// Margin giving exp(-margin^2 / (2 sigma2 N)) below 1e-30.
std::int64_t safe_margin(double sigma2, std::int64_t N);

// Duhamel form: f_j = P^j f0 + sum_{l<j} P^{j-1-l} (delta^2 g_l + delta u_dot grad_hat f_l),
// with P the free lazy-walk kernel read from `table`. Marches in time using its own
// earlier slices; every kernel sum is over the full support.
GridFunction solve_mild(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                        std::int64_t A, const KernelTable& table);

// sup over stored times and sites in [-A, A] of |a - b|.
double max_difference(const GridFunction& a, const GridFunction& b, std::int64_t A);

struct IbpReport {
  double j_residual = 0.0;          // max over anchors of |J_ibp(a) - J|
  double grad_residual = 0.0;       // forward-gradient identity
  double grad_hat_residual = 0.0;   // centered-gradient identity
  double anchor_spread = 0.0;       // max |J_ibp(a1) - J_ibp(a2)|
  double j_scale = 0.0;             // sup |J|
  double max_residual() const { return std::max({j_residual, grad_residual, grad_hat_residual}); }
};

// Summation-by-parts forms of the noise term and of the two spatial gradients of f,
// evaluated at every time and every site of [-A, A] for each anchor (site index).
IbpReport ibp_identity_check(const RescaledEnvironment& renv, const GridFunction& direct, const InitialFn& f0,
                             const ForcingFn& g, std::int64_t A, const std::vector<std::int64_t>& anchors,
                             const KernelTable& table);

struct VDeltaSolution {
  double delta = 1.0;
  double epsilon = 0.0;
  double derivative_factor = 0.0;  // dv = derivative_factor * v
  GridFunction v;                  // forward gradient of f
  GridFunction f;
  // v-equation diagnostics (exact mode only)
  double v_equation_residual = -1.0;
  double j0_contribution = 0.0;    // sup of the j = 0 kernel term

  // Space-time piecewise-linear interpolation; t < delta^2 clamps to delta^2.
  double interpolate(double t, double x) const;
  double derivative(double t, double x) const { return derivative_factor * interpolate(t, x); }
};

// Default factor in dv = factor * v: -2/sigma2.
double default_derivative_factor(double sigma2);

// v = grad f with f from solve_direct; additionally evaluates the mild v-equation
// (kernel second differences against trapezoidal noise sums) and records its residual.
VDeltaSolution build_v_delta(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                             std::int64_t A, const KernelTable* table);
// Noise-field mode: the environment is built from a per-site u_bar field.
VDeltaSolution build_v_delta(double epsilon, double delta, const SiteVector& u_bar, const InitialFn& f0,
                             const ForcingFn& g, std::int64_t N, std::int64_t A, const KernelTable* table);
// Large-N mode without the v-equation check: windowed solve, stored every `stride` steps.
VDeltaSolution build_v_delta_windowed(const RescaledEnvironment& renv, const InitialFn& f0, std::int64_t N,
                                      std::int64_t A, std::int64_t stride);

// The noise sum I_t(x, y) = sum_{z=x}^{y} (v(z)+v(z-1))/2 u_bar(z) (signed for y < x).
double noise_sum(const SiteVector& v, const SiteVector& u_bar, std::int64_t x, std::int64_t y);

}  // namespace rwre
