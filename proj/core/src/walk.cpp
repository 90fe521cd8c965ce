#include "rwre/walk.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/rng.hpp"

namespace rwre {

namespace {

void require_sites(const RescaledEnvironment& renv, std::int64_t lo, std::int64_t hi, const char* what) {
  if (!renv.contains(lo) || !renv.contains(hi))
    throw ConfigError(std::string(what) + ": needs environment on sites [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] but the window is [" + std::to_string(renv.omega_plus.lo) + ", " +
                      std::to_string(renv.omega_plus.hi()) + "]");
}

int step_sign(double u, double v, double eps, double threshold) {
  if (u <= eps) return 0;
  return v <= threshold ? 1 : -1;
}

}  // namespace

StepDistribution step_distribution(const RescaledEnvironment& renv, std::int64_t k) {
  if (!renv.contains(k - 1) || !renv.contains(k + 1))
    throw RangeError("step distribution at boundary site " + std::to_string(k));
  const double wp = renv.omega_plus[k];
  return {renv.sigma2() - wp, renv.epsilon, wp};
}

double Trajectory::at_time(double t) const {
  const auto j = static_cast<std::size_t>(std::floor(t / (delta * delta) + 1e-12));
  if (j >= sites.size()) throw RangeError("trajectory queried beyond its horizon");
  return position(j);
}

UniformPair step_uniforms(std::uint64_t seed, std::int64_t step) {
  Stream s(seed, step);
  const double u = s.uniform();
  const double v = s.uniform();
  return {u, v};
}

Trajectory simulate_walk(const RescaledEnvironment& renv, std::int64_t steps, std::int64_t x0, std::uint64_t seed) {
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  require_sites(renv, x0 - steps, x0 + steps, "simulate_walk");
  Trajectory tr;
  tr.delta = renv.delta;
  tr.x0 = x0;
  tr.seed = seed;
  tr.sites.resize(static_cast<std::size_t>(steps + 1));
  tr.sites[0] = x0;
  const double s2 = renv.sigma2();
  std::int64_t x = x0;
  for (std::int64_t j = 0; j < steps; ++j) {
    const auto [u, v] = step_uniforms(seed, j);
    x += step_sign(u, v, renv.epsilon, renv.omega_plus[x] / s2);
    tr.sites[static_cast<std::size_t>(j + 1)] = x;
  }
  return tr;
}

SiteVector apply_transition(const RescaledEnvironment& renv, const SiteVector& f) {
  if (f.size() < 3) throw RangeError("transition needs at least three sites");
  SiteVector out(f.lo + 1, f.size() - 2);
  require_sites(renv, out.lo, out.hi(), "apply_transition");
  const double eps = renv.epsilon, s2 = renv.sigma2();
  const double* fp = f.v.data() + 1;
  const double* wp = &renv.omega_plus.v[static_cast<std::size_t>(out.lo - renv.omega_plus.lo)];
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = wp[i] * fp[i + 1] + (s2 - wp[i]) * fp[i - 1] + eps * fp[i];
  return out;
}

double quenched_expectation_steps(const RescaledEnvironment& renv, const std::function<double(double)>& h, std::int64_t N,
                                  std::int64_t x0) {
  if (N < 0) throw ConfigError("negative step count");
  require_sites(renv, x0 - N, x0 + N, "quenched_expectation");
  const double d = renv.delta, eps = renv.epsilon, s2 = renv.sigma2();
  std::vector<double> f(static_cast<std::size_t>(2 * N + 1)), g(f.size());
  for (std::int64_t k = -N; k <= N; ++k) f[static_cast<std::size_t>(k + N)] = h(static_cast<double>(x0 + k) * d);
  // after n applications f[i] holds (T^n h)(x0 - N + i) for i in [n, 2N - n]
  const double* wp = &renv.omega_plus[x0 - N];
  for (std::int64_t n = 1; n <= N; ++n) {
    const auto lo = static_cast<std::size_t>(n), hi = static_cast<std::size_t>(2 * N - n);
    for (std::size_t i = lo; i <= hi; ++i) g[i] = wp[i] * f[i + 1] + (s2 - wp[i]) * f[i - 1] + eps * f[i];
    std::swap(f, g);
  }
  return f[static_cast<std::size_t>(N)];
}

double quenched_expectation(const RescaledEnvironment& renv, const std::function<double(double)>& h, double T,
                            std::int64_t x0) {
  return quenched_expectation_steps(renv, h, steps_for_time(T, renv.delta), x0);
}

ForwardResult quenched_expectation_forward(const RescaledEnvironment& renv, const std::function<double(double)>& h,
                                           std::int64_t N, std::int64_t x0, double floor) {
  if (!renv.contains(x0)) throw ConfigError("start site outside the environment window");
  const std::int64_t W0 = renv.omega_plus.lo, W1 = renv.omega_plus.hi();
  const std::size_t n = renv.omega_plus.size();
  std::vector<double> mu(n, 0.0), nu(n, 0.0);
  const double* wp = renv.omega_plus.v.data();
  const double eps = renv.epsilon, s2 = renv.sigma2();
  std::int64_t a = x0 - W0, b = x0 - W0;  // occupied index range
  mu[static_cast<std::size_t>(a)] = 1.0;
  ForwardResult r;
  r.support_lo = r.support_hi = x0;
  for (std::int64_t step = 0; step < N; ++step) {
    if (a - 1 < 0 || b + 1 > static_cast<std::int64_t>(n) - 1)
      throw ConfigError("forward propagation reached the environment window edge [" + std::to_string(W0) + ", " +
                        std::to_string(W1) + "] at step " + std::to_string(step));
    const std::int64_t na = a - 1, nb = b + 1;
    for (std::int64_t i = na; i <= nb; ++i) {
      const double left = (i - 1 >= a) ? mu[static_cast<std::size_t>(i - 1)] * wp[i - 1] : 0.0;
      const double right = (i + 1 <= b) ? mu[static_cast<std::size_t>(i + 1)] * (s2 - wp[i + 1]) : 0.0;
      const double stay = (i >= a && i <= b) ? mu[static_cast<std::size_t>(i)] * eps : 0.0;
      nu[static_cast<std::size_t>(i)] = left + right + stay;
    }
    for (std::int64_t i = a; i <= b; ++i) mu[static_cast<std::size_t>(i)] = 0.0;
    std::swap(mu, nu);
    a = na;
    b = nb;
    while (a < b && mu[static_cast<std::size_t>(a)] <= floor) mu[static_cast<std::size_t>(a++)] = 0.0;
    while (b > a && mu[static_cast<std::size_t>(b)] <= floor) mu[static_cast<std::size_t>(b--)] = 0.0;
    r.support_lo = std::min(r.support_lo, a + W0);
    r.support_hi = std::max(r.support_hi, b + W0);
  }
  double s = 0.0, c = 0.0, m = 0.0;
  for (std::int64_t i = a; i <= b; ++i) {
    const double y = mu[static_cast<std::size_t>(i)] * h(static_cast<double>(i + W0) * renv.delta) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
    m += mu[static_cast<std::size_t>(i)];
  }
  r.value = s;
  r.mass = m;
  return r;
}

GeneratorResult generator_apply(const RescaledEnvironment& renv, const SiteVector& f) {
  GeneratorResult r;
  r.via_transition = apply_transition(renv, f);
  r.via_fields = SiteVector(r.via_transition.lo, r.via_transition.size());
  const double d = renv.delta, d2 = d * d, s2 = renv.sigma2();
  for (std::int64_t k = r.via_fields.lo; k <= r.via_fields.hi(); ++k) {
    const double lap = s2 / (2.0 * d2) * (f[k + 1] + f[k - 1] - 2.0 * f[k]);
    const double drift = renv.u_dot[k] / d * (f[k + 1] - f[k - 1]) / (2.0 * d);
    r.via_fields[k] = lap + drift;
    r.via_transition[k] = (r.via_transition[k] - f[k]) / d2;
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(r.via_fields[k] - r.via_transition[k]));
  }
  return r;
}

namespace {

double transition_at(const RescaledEnvironment& renv, const SpaceTimeFn& f, std::int64_t j, std::int64_t x) {
  const double wp = renv.omega_plus.at(x);
  return wp * f(j, x + 1) + (renv.sigma2() - wp) * f(j, x - 1) + renv.epsilon * f(j, x);
}

}  // namespace

std::vector<double> martingale_increments(const RescaledEnvironment& renv, const SpaceTimeFn& f, const Trajectory& traj) {
  std::vector<double> z(traj.sites.size(), 0.0);
  for (std::size_t j = 0; j + 1 < traj.sites.size(); ++j) {
    const auto jj = static_cast<std::int64_t>(j);
    z[j + 1] = f(jj, traj.sites[j + 1]) - transition_at(renv, f, jj, traj.sites[j]);
  }
  return z;
}

std::vector<double> martingale_residual(const RescaledEnvironment& renv, const SpaceTimeFn& f, const Trajectory& traj) {
  const double s2 = renv.sigma2();
  std::vector<double> M(traj.sites.size(), 0.0);
  const double f00 = f(0, traj.sites[0]);
  double acc = 0.0;
  for (std::size_t k = 1; k < traj.sites.size(); ++k) {
    const auto j = static_cast<std::int64_t>(k - 1);
    const std::int64_t x = traj.sites[k - 1], y = traj.sites[k];
    // delta^2 L f_j(x) = (s2/2) second difference + delta u_dot grad_hat
    const double lap = 0.5 * s2 * (f(j, x + 1) + f(j, x - 1) - 2.0 * f(j, x));
    const double drift = renv.u_dot.at(x) * 0.5 * (f(j, x + 1) - f(j, x - 1));
    const double dt = f(j + 1, y) - f(j, y);  // delta^2 grad_t f_j(X_{j+1})
    acc += lap + drift + dt;
    M[k] = f(static_cast<std::int64_t>(k), y) - f00 - acc;
  }
  return M;
}

ItoCheck ito_representation_check(const RescaledEnvironment& renv, const SpaceTimeFn& f, std::uint64_t seed,
                                  std::int64_t steps, std::int64_t x0) {
  require_sites(renv, x0 - steps - 1, x0 + steps + 1, "ito_representation_check");
  const double eps = renv.epsilon, s2 = renv.sigma2();
  ItoCheck r;
  std::int64_t x = x0;
  for (std::int64_t j = 0; j < steps; ++j) {
    const auto [u, v] = step_uniforms(seed, j);
    const double wp = renv.omega_plus[x];
    const int zbar = step_sign(u, v, eps, 0.5);
    const int zeta = step_sign(u, v, eps, wp / s2);
    const std::int64_t y = x + zeta;
    const double gm = f(j + 1, x - 1), g0 = f(j + 1, x), gp = f(j + 1, x + 1);
    const double lhs = f(j + 1, y) - (wp * gp + (s2 - wp) * gm + eps * g0);
    const double d1 = 0.5 * (gp - gm), d2 = 0.5 * (gp - 2.0 * g0 + gm);
    const double third = d2 * (static_cast<double>(zbar * zbar) - s2);
    const double rhs = d1 * zbar + d1 * ((zeta - zbar) - renv.u_dot[x]) + third;
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(lhs - rhs));
    const double ind = u > eps ? 1.0 : 0.0;
    r.max_zeta_square_mismatch = std::max({r.max_zeta_square_mismatch, std::abs(zbar * zbar - ind),
                                           std::abs(static_cast<double>(zeta * zeta - zbar * zbar))});
    r.max_third_term = std::max(r.max_third_term, std::abs(third));
    x = y;
  }
  return r;
}

}  // namespace rwre
