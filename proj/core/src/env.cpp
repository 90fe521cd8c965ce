#include "rwre/env.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_odds(double b) { return std::log((1.0 - b) / b); }

// Gauss-Kronrod over B in [lo, hi] of g(xi(B)) * beta_pdf(B).
double beta_integral(double a, double b, double lo, double hi, const std::function<double(double)>& g, double tol) {
  auto integrand = [&](double x) { return g(log_odds(x)) * boost::math::ibeta_derivative(a, b, x); };
  // tolerances below ~1e-14 only drive the recursion to its depth limit
  tol = std::max(tol, 1e-14);
  double err = 0.0, l1 = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 12, tol, &err, &l1);
  if (!std::isfinite(val) || err > 1e3 * tol * std::max(l1, 1e-300))
    throw NumericalError("quadrature did not converge on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "]: error estimate " + std::to_string(err));
  return val;
}

// E[xi | B in [lo, hi]] up to the positive normalizer.
double xi_moment_unnormalized(double a, double b, double lo, double hi) {
  return beta_integral(a, b, lo, hi, [](double x) { return x; }, 1e-15);
}

}  // namespace

std::string to_string(LawKind k) { return k == LawKind::TwoPoint ? "two-point" : "scaled-beta"; }

LawKind law_kind_from_string(const std::string& s) {
  if (s == "two-point") return LawKind::TwoPoint;
  if (s == "scaled-beta") return LawKind::ScaledBeta;
  throw ConfigError("unknown environment law '" + s + "' (expected two-point or scaled-beta)");
}

void EnvironmentSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1), got " + std::to_string(epsilon));
  const double s2 = sigma2();
  if (!(kappa_ell > 0.0 && kappa_ell < s2 / 2.0))
    throw ConfigError("kappa_ell must lie in (0, (1-epsilon)/2), got " + std::to_string(kappa_ell));
  if (kind == LawKind::TwoPoint) {
    if (!(half_spread >= 0.0) || s2 / 2.0 - half_spread < kappa_ell)
      throw ConfigError("two-point half spread " + std::to_string(half_spread) + " violates the ellipticity margin");
  } else {
    if (!(beta_a > 0.0 && beta_b > 0.0)) throw ConfigError("beta parameters must be positive");
  }
}

EnvironmentSpec EnvironmentSpec::two_point(double epsilon, double half_spread, double kappa_ell) {
  EnvironmentSpec s;
  s.epsilon = epsilon;
  s.kappa_ell = kappa_ell;
  s.kind = LawKind::TwoPoint;
  s.half_spread = half_spread;
  s.validate();
  return s;
}

EnvironmentSpec EnvironmentSpec::two_point_xi(double epsilon, double xi0, double kappa_ell) {
  const double s2 = 1.0 - epsilon;
  // omega+ = s2/(1+e^{xi0}) = s2/2 - c  =>  c = (s2/2) tanh(xi0/2)
  return two_point(epsilon, 0.5 * s2 * std::tanh(0.5 * xi0), kappa_ell);
}

EnvironmentSpec EnvironmentSpec::scaled_beta(double epsilon, double a, double kappa_ell) {
  return scaled_beta(epsilon, a, a, kappa_ell);
}

EnvironmentSpec EnvironmentSpec::scaled_beta(double epsilon, double a, double b, double kappa_ell) {
  EnvironmentSpec s;
  s.epsilon = epsilon;
  s.kappa_ell = kappa_ell;
  s.kind = LawKind::ScaledBeta;
  s.beta_a = a;
  s.beta_b = b;
  s.validate();
  return s;
}

XiLaw XiLaw::gaussian(double sd) {
  XiLaw l;
  l.kind_ = Kind::Gaussian;
  l.sd_ = sd;
  return l;
}

XiLaw XiLaw::two_point(double xi0) {
  XiLaw l;
  l.kind_ = Kind::TwoPoint;
  l.xi0_ = std::abs(xi0);
  l.sd_ = std::abs(xi0);
  return l;
}

XiLaw XiLaw::truncated_beta(double a, double b, double b_lo, double b_hi) {
  if (!(0.0 < b_lo && b_lo < b_hi && b_hi < 1.0)) throw ConfigError("invalid beta truncation window");
  XiLaw l;
  l.kind_ = Kind::TruncatedBeta;
  l.a_ = a;
  l.b_ = b;
  l.lo_ = b_lo;
  l.hi_ = b_hi;
  l.f_lo_ = boost::math::ibeta(a, b, b_lo);
  l.f_hi_ = boost::math::ibeta(a, b, b_hi);
  l.sd_ = std::sqrt(l.variance());
  return l;
}

XiLaw XiLaw::from_spec(const EnvironmentSpec& spec) {
  spec.validate();
  const double s2 = spec.sigma2();
  if (spec.kind == LawKind::TwoPoint) {
    const double lo = s2 / 2.0 - spec.half_spread, hi = s2 / 2.0 + spec.half_spread;
    return two_point(std::log(hi / lo));
  }
  const double m = spec.kappa_ell / s2;
  const double a = spec.beta_a, b = spec.beta_b;
  if (a == b) return truncated_beta(a, b, m, 1.0 - m);
  // One end at the margin, the other moved inward until E[xi] = 0.
  const double full = xi_moment_unnormalized(a, b, m, 1.0 - m);
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  if (full > 0.0) {
    auto f = [&](double lo) { return xi_moment_unnormalized(a, b, lo, 1.0 - m); };
    auto r = boost::math::tools::toms748_solve(f, m, 0.5, tol, iters);
    return truncated_beta(a, b, 0.5 * (r.first + r.second), 1.0 - m);
  }
  auto f = [&](double hi) { return xi_moment_unnormalized(a, b, m, hi); };
  auto r = boost::math::tools::toms748_solve(f, 0.5, 1.0 - m, tol, iters);
  return truncated_beta(a, b, m, 0.5 * (r.first + r.second));
}

double XiLaw::support_lo() const {
  switch (kind_) {
    case Kind::Gaussian: return -std::numeric_limits<double>::infinity();
    case Kind::TwoPoint: return -xi0_;
    case Kind::TruncatedBeta: return log_odds(hi_);
  }
  return kNaN;
}

double XiLaw::support_hi() const {
  switch (kind_) {
    case Kind::Gaussian: return std::numeric_limits<double>::infinity();
    case Kind::TwoPoint: return xi0_;
    case Kind::TruncatedBeta: return log_odds(lo_);
  }
  return kNaN;
}

double XiLaw::cdf(double x) const {
  switch (kind_) {
    case Kind::Gaussian: return boost::math::cdf(boost::math::normal_distribution<double>(0.0, sd_), x);
    case Kind::TwoPoint: return x < -xi0_ ? 0.0 : (x < xi0_ ? 0.5 : 1.0);
    case Kind::TruncatedBeta: {
      // xi <= x  <=>  B >= 1/(1+e^x)
      const double bx = 1.0 / (1.0 + std::exp(x));
      if (bx >= hi_) return 0.0;
      if (bx <= lo_) return 1.0;
      return (f_hi_ - boost::math::ibeta(a_, b_, bx)) / (f_hi_ - f_lo_);
    }
  }
  return kNaN;
}

double XiLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw NumericalError("quantile requested at p = " + std::to_string(p));
  switch (kind_) {
    case Kind::Gaussian: return boost::math::quantile(boost::math::normal_distribution<double>(0.0, sd_), p);
    case Kind::TwoPoint: return p <= 0.5 ? -xi0_ : xi0_;
    case Kind::TruncatedBeta: {
      const double target = f_hi_ - p * (f_hi_ - f_lo_);
      double b = boost::math::ibeta_inv(a_, b_, target);
      b = std::clamp(b, lo_, hi_);
      const double r = log_odds(b);
      if (!std::isfinite(r)) throw NumericalError("beta quantile inversion failed at p = " + std::to_string(p));
      return r;
    }
  }
  return kNaN;
}

double XiLaw::quantile_upper(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw NumericalError("upper quantile requested at q = " + std::to_string(q));
  switch (kind_) {
    case Kind::Gaussian:
      return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(0.0, sd_), q));
    case Kind::TwoPoint: return q < 0.5 ? xi0_ : -xi0_;
    case Kind::TruncatedBeta: {
      double b = boost::math::ibeta_inv(a_, b_, f_lo_ + q * (f_hi_ - f_lo_));
      b = std::clamp(b, lo_, hi_);
      const double r = log_odds(b);
      if (!std::isfinite(r)) throw NumericalError("beta quantile inversion failed at q = " + std::to_string(q));
      return r;
    }
  }
  return kNaN;
}

double XiLaw::expect(const std::function<double(double)>& g, double tol) const {
  switch (kind_) {
    case Kind::TwoPoint: return 0.5 * (g(-xi0_) + g(xi0_));
    case Kind::Gaussian: {
      const double c = 1.0 / (sd_ * std::sqrt(2.0 * M_PI));
      auto f = [&](double x) { return g(x) * c * std::exp(-0.5 * x * x / (sd_ * sd_)); };
      double err = 0.0;
      const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0 * sd_, 12.0 * sd_, 12,
                                                                                    std::max(tol, 1e-14), &err);
      return v;
    }
    case Kind::TruncatedBeta: return beta_integral(a_, b_, lo_, hi_, g, tol) / (f_hi_ - f_lo_);
  }
  return kNaN;
}

double XiLaw::mean() const { return expect([](double x) { return x; }); }

double XiLaw::variance() const {
  if (kind_ == Kind::Gaussian) return sd_ * sd_;
  if (kind_ == Kind::TwoPoint) return xi0_ * xi0_;
  const double m = mean();
  return expect([](double x) { return x * x; }) - m * m;
}

double XiLaw::third_moment() const {
  if (kind_ != Kind::TruncatedBeta) return 0.0;
  return expect([](double x) { return x * x * x; });
}

Environment sample_environment(const EnvironmentSpec& spec, std::int64_t radius, std::uint64_t seed) {
  spec.validate();
  if (radius < 0) throw ConfigError("radius must be nonnegative");
  Environment env;
  env.spec = spec;
  env.radius = radius;
  env.seed = seed;
  env.omega_plus = SiteVector(-radius, static_cast<std::size_t>(2 * radius + 1));
  const double s2 = spec.sigma2();
  const XiLaw law = XiLaw::from_spec(spec);
  for (std::int64_t x = -radius; x <= radius; ++x) {
    Stream st(seed, x);
    const double u = st.uniform();
    double w;
    if (spec.kind == LawKind::TwoPoint) {
      w = u < 0.5 ? s2 / 2.0 - spec.half_spread : s2 / 2.0 + spec.half_spread;
    } else {
      // Inversion of the truncated law: same distribution as rejection.
      const double target = boost::math::ibeta(law.beta_a(), law.beta_b(), law.b_lo()) +
                            u * (boost::math::ibeta(law.beta_a(), law.beta_b(), law.b_hi()) -
                                 boost::math::ibeta(law.beta_a(), law.beta_b(), law.b_lo()));
      const double b = std::clamp(boost::math::ibeta_inv(law.beta_a(), law.beta_b(), target), law.b_lo(), law.b_hi());
      w = s2 * b;
    }
    env.omega_plus[x] = std::clamp(w, spec.kappa_ell, s2 - spec.kappa_ell);
  }
  return env;
}

double xi(const Environment& env, std::int64_t x) {
  const double wp = env.omega_plus.at(x);
  return std::log((env.sigma2() - wp) / wp);
}

RescaledEnvironment RescaledEnvironment::from_xi(double epsilon, double delta, const SiteVector& xi_field, double ubar2) {
  RescaledEnvironment r;
  r.delta = delta;
  r.epsilon = epsilon;
  r.radius = std::max(-xi_field.lo, xi_field.hi());
  const double s2 = 1.0 - epsilon, sd = std::sqrt(delta);
  r.omega_plus = SiteVector(xi_field.lo, xi_field.size());
  for (std::int64_t k = xi_field.lo; k <= xi_field.hi(); ++k) r.omega_plus[k] = s2 / (1.0 + std::exp(sd * xi_field[k]));
  r.u_bar2 = ubar2;
  NoiseFields nf = noise_fields(r);
  r.u_dot = std::move(nf.u_dot);
  r.u_bar = std::move(nf.u_bar);
  r.u_bar1 = std::move(nf.u_bar1);
  return r;
}

RescaledEnvironment RescaledEnvironment::from_noise(double epsilon, double delta, const SiteVector& field, double ubar2) {
  RescaledEnvironment r;
  r.delta = delta;
  r.epsilon = epsilon;
  r.radius = std::max(-field.lo, field.hi());
  const double s2 = 1.0 - epsilon, tiny = 1e-12 * s2;
  r.omega_plus = SiteVector(field.lo, field.size());
  for (std::int64_t k = field.lo; k <= field.hi(); ++k) {
    // u_dot = -field/2 and u_dot = 2 omega+ - s2
    const double w = 0.5 * (s2 - 0.5 * field[k]);
    const double c = std::clamp(w, tiny, s2 - tiny);
    if (c != w) ++r.clamped_sites;
    r.omega_plus[k] = c;
  }
  r.u_bar2 = ubar2;
  NoiseFields nf = noise_fields(r);
  r.u_dot = std::move(nf.u_dot);
  r.u_bar = std::move(nf.u_bar);
  r.u_bar1 = std::move(nf.u_bar1);
  return r;
}

RescaledEnvironment RescaledEnvironment::flat(double epsilon, double delta, std::int64_t radius) {
  SiteVector xi0(-radius, static_cast<std::size_t>(2 * radius + 1), 0.0);
  return from_xi(epsilon, delta, xi0, 0.0);
}

RescaledEnvironment RescaledEnvironment::mirrored() const {
  RescaledEnvironment r = *this;
  const double s2 = sigma2();
  r.omega_plus = SiteVector(-omega_plus.hi(), omega_plus.size());
  for (std::int64_t k = r.omega_plus.lo; k <= r.omega_plus.hi(); ++k) r.omega_plus[k] = s2 - omega_plus[-k];
  NoiseFields nf = noise_fields(r);
  r.u_dot = std::move(nf.u_dot);
  r.u_bar = std::move(nf.u_bar);
  r.u_bar1 = std::move(nf.u_bar1);
  return r;
}

namespace {

// tanh(u) - u without cancellation: Taylor series for small |u|.
double tanh_minus_identity(double u) {
  if (std::abs(u) >= 0.1) return std::tanh(u) - u;
  static constexpr double c[] = {-1.0 / 3.0,          2.0 / 15.0,           -17.0 / 315.0,
                                 62.0 / 2835.0,       -1382.0 / 155925.0,   21844.0 / 6081075.0,
                                 -929569.0 / 638512875.0, 6404582.0 / 10854718875.0};
  const double u2 = u * u;
  double s = 0.0;
  for (int i = 7; i >= 0; --i) s = s * u2 + c[i];
  return s * u2 * u;
}

}  // namespace

double u_bar2(const XiLaw& law, double sigma2, double delta) {
  if (law.kind() != XiLaw::Kind::TruncatedBeta) return 0.0;  // symmetric laws
  const double h = 0.5 * std::sqrt(delta);
  const double nonlinear = law.expect([h](double x) { return tanh_minus_identity(h * x); }, 1e-16);
  return 2.0 * sigma2 * (nonlinear + h * law.mean());
}

double u_bar2(const EnvironmentSpec& spec, double delta) { return u_bar2(XiLaw::from_spec(spec), spec.sigma2(), delta); }

double u_bar2_leading_constant(const XiLaw& law, double sigma2) {
  // tanh(u) - u = -u^3/3 + ...,  u = sqrt(delta) xi / 2
  return -sigma2 * law.third_moment() / 12.0;
}

double xi_variance(const EnvironmentSpec& spec) { return XiLaw::from_spec(spec).variance(); }

double brownian_variance(const EnvironmentSpec& spec) {
  const double s2 = spec.sigma2();
  return s2 * s2 * xi_variance(spec);
}

RescaledEnvironment rescale_environment(const Environment& env, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0,1]");
  SiteVector xis(env.omega_plus.lo, env.omega_plus.size());
  for (std::int64_t k = xis.lo; k <= xis.hi(); ++k) xis[k] = xi(env, k);
  RescaledEnvironment r = RescaledEnvironment::from_xi(env.spec.epsilon, delta, xis, u_bar2(env.spec, delta));
  if (delta == 1.0) {
    r.omega_plus = env.omega_plus;
    NoiseFields nf = noise_fields(r);
    r.u_dot = std::move(nf.u_dot);
    r.u_bar = std::move(nf.u_bar);
    r.u_bar1 = std::move(nf.u_bar1);
  }
  return r;
}

NoiseFields noise_fields(const RescaledEnvironment& renv) {
  NoiseFields nf;
  const double s2 = renv.sigma2();
  const auto& wp = renv.omega_plus;
  nf.u_dot = SiteVector(wp.lo, wp.size());
  nf.u_bar = SiteVector(wp.lo, wp.size());
  nf.u_bar1 = SiteVector(wp.lo, wp.size());
  nf.u_bar2 = renv.u_bar2;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    nf.u_dot.v[i] = 2.0 * wp.v[i] - s2;
    nf.u_bar.v[i] = -2.0 * nf.u_dot.v[i];
    nf.u_bar1.v[i] = nf.u_bar.v[i] - renv.u_bar2;
  }
  return nf;
}

double PiecewiseLinearPath::operator()(double x) const {
  const double s = x / step_;
  const double fl = std::floor(s);
  const auto k = static_cast<std::int64_t>(fl);
  if (k < anchors_.lo || k > anchors_.hi() || (k == anchors_.hi() && s > fl))
    throw RangeError("path evaluated at " + std::to_string(x) + " outside [" + std::to_string(x_min()) + ", " +
                     std::to_string(x_max()) + "]");
  const double r = s - fl;
  if (r == 0.0) return anchors_[k];
  return (1.0 - r) * anchors_[k] + r * anchors_[k + 1];
}

PiecewiseLinearPath interpolate_noise(const SiteVector& field, double delta) {
  if (field.lo > 1 || field.hi() < 0) throw RangeError("noise field must contain the origin");
  SiteVector a(field.lo - 1, field.size() + 1);
  a[0] = 0.0;
  for (std::int64_t k = 1; k <= field.hi(); ++k) a[k] = a[k - 1] + field[k];
  for (std::int64_t k = -1; k >= field.lo - 1; --k) a[k] = a[k + 1] - field[k + 1];
  return PiecewiseLinearPath(delta, std::move(a));
}

}  // namespace rwre
