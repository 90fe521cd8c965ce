#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rwre/common.hpp"

namespace rwre {

enum class LawKind { TwoPoint, ScaledBeta };

std::string to_string(LawKind k);
LawKind law_kind_from_string(const std::string& s);

// Law of the i.i.d. environment. sigma2 = 1 - epsilon.
//   two-point:   omega+ in {sigma2/2 - c, sigma2/2 + c} with probability 1/2 each
//   scaled-beta: omega+ = sigma2 * B, B ~ Beta(a, b) truncated to [b_lo, b_hi].
// For a == b the truncation is [m, 1-m] with m = kappa_ell / sigma2. For a != b
// one end sits at the margin and the other is solved so that E[xi] = 0.
struct EnvironmentSpec {
  double epsilon = 0.2;
  double kappa_ell = 0.01;
  LawKind kind = LawKind::TwoPoint;
  double half_spread = 0.2;
  double beta_a = 2.0;
  double beta_b = 2.0;

  double sigma2() const { return 1.0 - epsilon; }
  void validate() const;

  static EnvironmentSpec two_point(double epsilon, double half_spread, double kappa_ell);
  // Two-point law with xi = log(omega-/omega+) in {-xi0, +xi0}.
  static EnvironmentSpec two_point_xi(double epsilon, double xi0, double kappa_ell);
  static EnvironmentSpec scaled_beta(double epsilon, double a, double kappa_ell);
  static EnvironmentSpec scaled_beta(double epsilon, double a, double b, double kappa_ell);
};

// Law of xi = log(omega-/omega+). Also carries the Gaussian law used as a
// control in coupling experiments (not an environment law).
class XiLaw {
 public:
  enum class Kind { Gaussian, TwoPoint, TruncatedBeta };

  static XiLaw gaussian(double sd);
  static XiLaw two_point(double xi0);
  static XiLaw truncated_beta(double a, double b, double b_lo, double b_hi);
  static XiLaw from_spec(const EnvironmentSpec& spec);

  Kind kind() const { return kind_; }
  bool is_lattice() const { return kind_ == Kind::TwoPoint; }
  double xi0() const { return xi0_; }
  double sd() const { return sd_; }
  double beta_a() const { return a_; }
  double beta_b() const { return b_; }
  double b_lo() const { return lo_; }
  double b_hi() const { return hi_; }
  double support_lo() const;
  double support_hi() const;

  double cdf(double x) const;
  double quantile(double p) const;
  // F^{-1}(1 - q), accurate for small q.
  double quantile_upper(double q) const;
  // E[g(xi)]; analytic for two-point, adaptive Gauss-Kronrod otherwise.
  double expect(const std::function<double(double)>& g, double tol = 1e-14) const;
  double mean() const;
  double variance() const;
  double third_moment() const;
  // xi from a uniform in (0,1) by inversion.
  double sample(double u) const { return quantile(u); }

 private:
  Kind kind_ = Kind::Gaussian;
  double sd_ = 1.0, xi0_ = 0.0;
  double a_ = 1.0, b_ = 1.0, lo_ = 0.0, hi_ = 1.0, f_lo_ = 0.0, f_hi_ = 1.0;
};

struct Environment {
  EnvironmentSpec spec;
  std::int64_t radius = 0;
  std::uint64_t seed = 0;
  SiteVector omega_plus;  // sites [-radius, radius]

  double sigma2() const { return spec.sigma2(); }
  double omega_minus(std::int64_t x) const { return sigma2() - omega_plus.at(x); }
};

Environment sample_environment(const EnvironmentSpec& spec, std::int64_t radius, std::uint64_t seed);

// log(omega-(x) / omega+(x)).
double xi(const Environment& env, std::int64_t x);

// Environment on the grid delta*Z. Sites are integers k standing for x = k*delta.
struct RescaledEnvironment {
  double delta = 1.0;
  double epsilon = 0.0;
  std::int64_t radius = 0;
  SiteVector omega_plus;
  SiteVector u_dot;   // 2 omega+ - sigma2
  SiteVector u_bar;   // -2 u_dot
  SiteVector u_bar1;  // u_bar - u_bar2
  double u_bar2 = 0.0;
  std::int64_t clamped_sites = 0;  // only for noise-driven construction

  double sigma2() const { return 1.0 - epsilon; }
  double omega_minus(std::int64_t k) const { return sigma2() - omega_plus.at(k); }
  bool contains(std::int64_t k) const { return omega_plus.contains(k); }

  // omega+(k) = sigma2 / (1 + exp(sqrt(delta) xi(k))).
  static RescaledEnvironment from_xi(double epsilon, double delta, const SiteVector& xi, double u_bar2);
  // Environment whose u_bar equals the given field (u_dot = -field/2). omega+ is
  // clamped into [tiny, sigma2 - tiny]; the number of clamped sites is recorded.
  static RescaledEnvironment from_noise(double epsilon, double delta, const SiteVector& field, double u_bar2 = 0.0);
  // Symmetric environment omega+ = sigma2/2 everywhere.
  static RescaledEnvironment flat(double epsilon, double delta, std::int64_t radius);
  // Spatial mirror: omega+(k) -> omega-(-k).
  RescaledEnvironment mirrored() const;
};

// E[u_bar] for the spec at step delta: 2 sigma2 E[tanh(sqrt(delta) xi / 2)].
double u_bar2(const EnvironmentSpec& spec, double delta);
double u_bar2(const XiLaw& law, double sigma2, double delta);
// Leading coefficient c in u_bar2 = c delta^{3/2} + o(delta^{3/2}).
double u_bar2_leading_constant(const XiLaw& law, double sigma2);
// Var(xi) and the Brownian variance sigma2^2 Var(xi).
double xi_variance(const EnvironmentSpec& spec);
double brownian_variance(const EnvironmentSpec& spec);

RescaledEnvironment rescale_environment(const Environment& env, double delta);

struct NoiseFields {
  SiteVector u_dot, u_bar, u_bar1;
  double u_bar2 = 0.0;
};
NoiseFields noise_fields(const RescaledEnvironment& renv);

// Piecewise linear path with P(0) = 0 and P(k delta) - P((k-1) delta) = field(k).
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath() = default;
  PiecewiseLinearPath(double step, SiteVector anchors) : step_(step), anchors_(std::move(anchors)) {}

  double step() const { return step_; }
  const SiteVector& anchors() const { return anchors_; }
  double x_min() const { return static_cast<double>(anchors_.lo) * step_; }
  double x_max() const { return static_cast<double>(anchors_.hi()) * step_; }
  double at_site(std::int64_t k) const { return anchors_.at(k); }
  double operator()(double x) const;

 private:
  double step_ = 1.0;
  SiteVector anchors_;
};

// field must cover sites lo..hi with lo <= 0 <= hi. The anchor at the left end
// (site lo-1's increment) is unavailable, so anchors span [lo-1, hi].
PiecewiseLinearPath interpolate_noise(const SiteVector& field, double delta);

}  // namespace rwre
