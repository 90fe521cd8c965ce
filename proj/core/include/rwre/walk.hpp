#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/env.hpp"

namespace rwre {

struct StepDistribution {
  double p_left, p_stay, p_right;
};

// (omega-(k), epsilon, omega+(k)); requires k and k +- 1 in the window.
StepDistribution step_distribution(const RescaledEnvironment& renv, std::int64_t k);

struct Trajectory {
  double delta = 1.0;
  std::int64_t x0 = 0;                 // start site
  std::vector<std::int64_t> sites;     // sites[j] = position at t_j = j delta^2, sites[0] = x0
  std::uint64_t seed = 0;
  double time(std::size_t j) const { return static_cast<double>(j) * delta * delta; }
  double position(std::size_t j) const { return static_cast<double>(sites[j]) * delta; }
  // Piecewise constant in continuous time.
  double at_time(double t) const;
};

// Step j uses the uniform pair (U_j, V_j) of stream j under key seed:
// stay if U <= epsilon, else right if V <= omega+/sigma2, else left.
struct UniformPair {
  double u, v;
};
UniformPair step_uniforms(std::uint64_t seed, std::int64_t step);

Trajectory simulate_walk(const RescaledEnvironment& renv, std::int64_t steps, std::int64_t x0, std::uint64_t seed);

// Applies T^delta f(k) = omega+(k) f(k+1) + omega-(k) f(k-1) + epsilon f(k) on the
// interior of f's range (output range shrinks by one site on each side).
SiteVector apply_transition(const RescaledEnvironment& renv, const SiteVector& f);

// E[h(X_T)] from x0 by N = T/delta^2 exact applications of T^delta to h.
double quenched_expectation(const RescaledEnvironment& renv, const std::function<double(double)>& h, double T, std::int64_t x0);
double quenched_expectation_steps(const RescaledEnvironment& renv, const std::function<double(double)>& h, std::int64_t N, std::int64_t x0);

// Same quantity by pushing the point mass at x0 forward N steps. Entries below
// `floor` are dropped from the support; with floor = 0 the result is the exact
// forward iteration. Cost is proportional to the occupied support.
struct ForwardResult {
  double value = 0.0;
  double mass = 0.0;
  std::int64_t support_lo = 0, support_hi = 0;  // extent reached over the run
};
ForwardResult quenched_expectation_forward(const RescaledEnvironment& renv, const std::function<double(double)>& h,
                                           std::int64_t N, std::int64_t x0, double floor = 1e-300);

struct GeneratorResult {
  SiteVector via_fields;      // Lbar f + (1/delta) u_dot grad_hat f
  SiteVector via_transition;  // (T f - f) / delta^2
  double max_discrepancy = 0.0;
};
GeneratorResult generator_apply(const RescaledEnvironment& renv, const SiteVector& f);

// f(j, k): value of f at time t_j and site k.
using SpaceTimeFn = std::function<double(std::int64_t, std::int64_t)>;

// M_k = f_k(X_k) - f_0(X_0) - sum_{j<k} delta^2 [L f_j(X_j) + grad_t f_j(X_{j+1})].
// Increments are Z_{j+1} = f_j(X_{j+1}) - T f_j(X_j).
std::vector<double> martingale_residual(const RescaledEnvironment& renv, const SpaceTimeFn& f, const Trajectory& traj);
std::vector<double> martingale_increments(const RescaledEnvironment& renv, const SpaceTimeFn& f, const Trajectory& traj);

struct ItoCheck {
  double max_discrepancy = 0.0;
  double max_zeta_square_mismatch = 0.0;  // |zeta_bar^2 - 1{U>eps}| and |zeta^2 - zeta_bar^2|
  double max_third_term = 0.0;
};
// Drives the walk with (U_j, V_j) and compares Z_{j+1} = f_{j+1}(X_{j+1}) - T f_{j+1}(X_j)
// with its three-term representation in zeta_bar and zeta^x.
ItoCheck ito_representation_check(const RescaledEnvironment& renv, const SpaceTimeFn& f, std::uint64_t seed,
                                  std::int64_t steps, std::int64_t x0 = 0);

}  // namespace rwre
