#include "rwre/rough.hpp"

#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

namespace rwre {

namespace {

// Pair scan over sites [K0, K1] restricted to nested windows [-a_r, a_r]. Calls
// f(i, j, cls) for each pair i < j, where cls is the smallest radius index whose
// window holds both ends. Banded when the largest window exceeds the exact limit.
template <class F>
bool nested_pairs(double step, std::int64_t K0, std::int64_t K1, const std::vector<double>& radii, F&& f) {
  std::vector<int> cls(static_cast<std::size_t>(K1 - K0 + 1));
  for (std::int64_t k = K0; k <= K1; ++k) {
    const double ax = std::abs(static_cast<double>(k) * step);
    int c = static_cast<int>(radii.size());
    for (std::size_t r = 0; r < radii.size(); ++r)
      if (ax <= radii[r] + 1e-9 * step) {
        c = static_cast<int>(r);
        break;
      }
    cls[static_cast<std::size_t>(k - K0)] = c;
  }
  const std::int64_t n = K1 - K0 + 1;
  const bool banded = n > kExactHolderPoints;
  const std::int64_t band = banded ? n / 4 : n;
  for (std::int64_t i = K0; i <= K1; ++i) {
    const int ci = cls[static_cast<std::size_t>(i - K0)];
    if (ci == static_cast<int>(radii.size())) continue;
    const std::int64_t jmax = std::min(K1, i + band);
    for (std::int64_t j = i + 1; j <= jmax; ++j) {
      const int c = std::max(ci, cls[static_cast<std::size_t>(j - K0)]);
      if (c == static_cast<int>(radii.size())) continue;
      f(i, j, c);
    }
  }
  return banded;
}

std::vector<double> inv_pow_table(std::int64_t n, double step, double e) {
  std::vector<double> t(static_cast<std::size_t>(n + 1), 0.0);
  for (std::int64_t d = 1; d <= n; ++d) t[static_cast<std::size_t>(d)] = std::pow(static_cast<double>(d) * step, -e);
  return t;
}

std::vector<double> sorted_radii(std::vector<double> r) {
  if (r.empty()) throw ConfigError("radius list is empty");
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

GridRoughPath lift(const SiteVector& values, double step) {
  if (values.size() < 2) throw ConfigError("lift needs at least two anchors");
  return GridRoughPath{step, values};
}

GridRoughPath lift(const PiecewiseLinearPath& path, double step, std::int64_t lo, std::int64_t hi) {
  SiteVector v(lo, static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t k = lo; k <= hi; ++k) v[k] = path(static_cast<double>(k) * step);
  return lift(v, step);
}

double chen_max_residual(const GridRoughPath& rp) {
  double m = 0.0;
  const std::int64_t lo = rp.values.lo, hi = rp.values.hi();
  for (std::int64_t s = lo; s <= hi; ++s)
    for (std::int64_t u = s; u <= hi; ++u)
      for (std::int64_t t = u; t <= hi; ++t)
        m = std::max(m, std::abs(rp.x2(s, t) - rp.x2(s, u) - rp.x2(u, t) - rp.x1(s, u) * rp.x1(u, t)));
  return m;
}

HolderResult holder_norm(const std::function<double(std::int64_t, std::int64_t)>& incr, double step, std::int64_t i0,
                         std::int64_t i1, double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0)) throw ConfigError("Hölder exponent must lie in (0,1]");
  HolderResult r;
  const std::int64_t n = i1 - i0 + 1;
  r.banded = n > kExactHolderPoints;
  const std::int64_t band = r.banded ? n / 4 : n;
  const auto w = inv_pow_table(n, step, exponent);
  for (std::int64_t i = i0; i <= i1; ++i)
    for (std::int64_t j = i + 1; j <= std::min(i1, i + band); ++j)
      r.value = std::max(r.value, std::abs(incr(i, j)) * w[static_cast<std::size_t>(j - i)]);
  return r;
}

std::pair<std::int64_t, std::int64_t> window_sites(const GridRoughPath& rp, double a) {
  const auto lo = static_cast<std::int64_t>(std::ceil(-a / rp.step - 1e-9));
  const auto hi = static_cast<std::int64_t>(std::floor(a / rp.step + 1e-9));
  if (!rp.values.contains(lo) || !rp.values.contains(hi))
    throw RangeError("window [-" + std::to_string(a) + ", " + std::to_string(a) + "] exceeds the path's grid");
  return {lo, hi};
}

HolderResult holder_norm(const GridRoughPath& rp, double exponent, double a) {
  const auto [lo, hi] = window_sites(rp, a);
  return holder_norm([&](std::int64_t i, std::int64_t j) { return rp.x1(i, j); }, rp.step, lo, hi, exponent);
}

namespace {

WeightedResult weighted_two_level(const GridRoughPath& A, const GridRoughPath* B, double alpha, double chi,
                                  const std::vector<double>& radii_in) {
  const auto radii = sorted_radii(radii_in);
  const auto [lo, hi] = window_sites(A, radii.back());
  if (B) {
    if (std::abs(B->step - A.step) > 1e-15 * A.step) throw AlignmentError("rough paths live on different grids");
    window_sites(*B, radii.back());
  }
  const std::int64_t n = hi - lo + 1;
  const auto w1 = inv_pow_table(n, A.step, alpha);
  const auto w2 = inv_pow_table(n, A.step, 2.0 * alpha);
  std::vector<double> s1(radii.size(), 0.0), s2(radii.size(), 0.0);
  WeightedResult r;
  r.banded = nested_pairs(A.step, lo, hi, radii, [&](std::int64_t i, std::int64_t j, int c) {
    const double a1 = A.x1(i, j);
    double d1 = a1, d2 = 0.5 * a1 * a1;
    if (B) {
      const double b1 = B->x1(i, j);
      d1 = a1 - b1;
      d2 = 0.5 * (a1 * a1 - b1 * b1);
    }
    const auto d = static_cast<std::size_t>(j - i);
    s1[static_cast<std::size_t>(c)] = std::max(s1[static_cast<std::size_t>(c)], std::abs(d1) * w1[d]);
    s2[static_cast<std::size_t>(c)] = std::max(s2[static_cast<std::size_t>(c)], std::abs(d2) * w2[d]);
  });
  for (std::size_t c = 1; c < radii.size(); ++c) {
    s1[c] = std::max(s1[c], s1[c - 1]);
    s2[c] = std::max(s2[c], s2[c - 1]);
  }
  r.per_radius.resize(radii.size());
  for (std::size_t c = 0; c < radii.size(); ++c) {
    r.per_radius[c] = s1[c] / std::pow(radii[c], chi) + s2[c] / std::pow(radii[c], 2.0 * chi);
    r.value = std::max(r.value, r.per_radius[c]);
  }
  return r;
}

}  // namespace

WeightedResult kappa_weighted(const GridRoughPath& rp, double alpha, double chi, const std::vector<double>& radii) {
  return weighted_two_level(rp, nullptr, alpha, chi, radii);
}

WeightedResult rho_distance(const GridRoughPath& A, const GridRoughPath& B, double alpha, double chi,
                            const std::vector<double>& radii) {
  return weighted_two_level(A, &B, alpha, chi, radii);
}

double rough_integral(const GridControlledPath& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j) {
  if (j < i) throw RangeError("rough integral needs x <= y");
  double s = 0.0;
  for (std::int64_t u = i; u < j; ++u) s += Y.v[u] * X.x1(u, u + 1) + Y.dv[u] * X.x2(u, u + 1);
  return s;
}

double trapezoidal_sum(const SiteVector& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j) {
  if (j < i) throw RangeError("trapezoidal sum needs x <= y");
  double s = 0.0;
  for (std::int64_t u = i; u < j; ++u) s += 0.5 * (Y[u] + Y[u + 1]) * X.x1(u, u + 1);
  return s;
}

double trapezoidal_sum(const GridControlledPath& Y, const GridRoughPath& X, std::int64_t i, std::int64_t j) {
  return trapezoidal_sum(Y.v, X, i, j);
}

double sewing_constant(double mu) {
  if (!(mu > 1.0)) throw std::domain_error("sewing exponent must exceed 1");
  return std::pow(2.0, mu) * boost::math::zeta(mu);
}

SewingReport sewing_check(const std::function<double(std::int64_t, std::int64_t)>& germ, std::int64_t n, double step,
                          double mu) {
  const double c = sewing_constant(mu);
  std::vector<double> prefix(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t l = 1; l < n; ++l) prefix[static_cast<std::size_t>(l)] = prefix[static_cast<std::size_t>(l - 1)] + germ(l - 1, l);
  auto R = [&](std::int64_t i, std::int64_t j) {
    return prefix[static_cast<std::size_t>(j)] - prefix[static_cast<std::size_t>(i)] - germ(i, j);
  };
  const auto w = inv_pow_table(n, step, mu);
  double rn = 0.0, dn = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j) {
      const double rij = R(i, j);
      rn = std::max(rn, std::abs(rij) * w[static_cast<std::size_t>(j - i)]);
      for (std::int64_t u = i + 1; u < j; ++u)
        dn = std::max(dn, std::abs(rij - R(i, u) - R(u, j)) * w[static_cast<std::size_t>(j - i)]);
    }
  SewingReport r;
  r.remainder_norm = rn;
  r.bound = c * dn;
  r.ratio = dn > 0.0 ? rn / dn : 0.0;
  r.pass = rn <= r.bound * (1.0 + 1e-12) + 1e-300;
  return r;
}

GermBoundReport germ_bound_check(const GridControlledPath& Y, const GridRoughPath& X, double alpha, double beta) {
  const double mu = alpha + 2.0 * beta;
  const std::int64_t lo = X.values.lo, hi = X.values.hi(), n = hi - lo + 1;
  auto germ = [&](std::int64_t i, std::int64_t j) {
    const std::int64_t a = i + lo, b = j + lo;
    return Y.v[a] * X.x1(a, b) + Y.dv[a] * X.x2(a, b) + 0.5 * Y.remainder(a, b) * X.x1(a, b);
  };
  const auto wmu = inv_pow_table(n, X.step, mu);
  double dn = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 2; j < n; ++j)
      for (std::int64_t u = i + 1; u < j; ++u)
        dn = std::max(dn, std::abs(germ(i, j) - germ(i, u) - germ(u, j)) * wmu[static_cast<std::size_t>(j - i)]);
  const double rnorm = holder_norm([&](std::int64_t i, std::int64_t j) { return Y.remainder(i, j); }, X.step, lo, hi, 2.0 * beta).value;
  const double xnorm = holder_norm([&](std::int64_t i, std::int64_t j) { return X.x1(i, j); }, X.step, lo, hi, alpha).value;
  const double C = sewing_constant(mu) * dn + 0.5 * rnorm * xnorm;
  GermBoundReport r;
  for (std::int64_t i = lo; i <= hi; ++i) {
    double trap = 0.0;
    for (std::int64_t j = i + 1; j <= hi; ++j) {
      trap += 0.5 * (Y.v[j - 1] + Y.v[j]) * X.x1(j - 1, j);
      const double lhs = std::abs(trap - Y.v[i] * X.x1(i, j) - Y.dv[i] * X.x2(i, j));
      const double bound = C / wmu[static_cast<std::size_t>(j - i)];
      if (bound > 0.0) r.max_ratio = std::max(r.max_ratio, lhs / bound);
      else if (lhs > 1e-14) r.max_ratio = INFINITY;
    }
  }
  r.pass = r.max_ratio <= 1.0 + 1e-9;
  return r;
}

void WeightParams::validate() const {
  if (!(1.0 / 3.0 < beta && beta < beta2 && beta2 < alpha && alpha < 0.5))
    throw ConfigError("exponents must satisfy 1/3 < beta < beta' < alpha < 1/2");
  if (!(0.5 - alpha < chi && chi < beta / 2.0)) throw ConfigError("chi must satisfy 1/2 - alpha < chi < beta/2");
  if (!(lambda > 1.0 && theta > 1.0)) throw ConfigError("lambda and theta must exceed 1");
  if (radii.empty()) throw ConfigError("radius list is empty");
  for (double a : radii)
    if (a < 1.0) throw ConfigError("radii must be >= 1");
}

double weight_E(double theta, double lambda, double a, double t) { return std::exp(lambda * t + theta * a + theta * a * t); }

double weight_Q_inv(double chi, double beta, double a, double t) {
  if (t <= 0.0) return 0.0;
  return 1.0 / (std::pow(a, chi) * (std::pow(a, beta / 2.0) + std::pow(t, -beta / 2.0)));
}

ControlledDistance controlled_distance(const SpaceTimeControlled& A, const SpaceTimeControlled* B, const WeightParams& p) {
  if (B && (B->lo != A.lo || B->hi != A.hi || B->times != A.times || std::abs(B->step - A.step) > 1e-15 * A.step))
    throw AlignmentError("controlled fields live on different grids");
  const auto radii = sorted_radii(p.radii);
  const double beta = p.beta, lg = std::pow(p.lambda, -p.gamma());
  const std::size_t nt = A.times.size();
  const std::int64_t nx = A.hi - A.lo + 1;
  auto fdiff = [&](std::size_t m, std::int64_t k) {
    const auto i = static_cast<std::size_t>(k - A.lo);
    return A.v[m][i] - (B ? B->v[m][i] : 0.0);
  };
  auto gdiff = [&](std::size_t m, std::int64_t k) {
    const auto i = static_cast<std::size_t>(k - A.lo);
    return A.dv[m][i] - (B ? B->dv[m][i] : 0.0);
  };
  auto rdiff = [&](std::size_t m, std::int64_t i, std::int64_t j) {
    return A.remainder(m, i, j) - (B ? B->remainder(m, i, j) : 0.0);
  };
  const auto w2b = inv_pow_table(nx, A.step, 2.0 * beta);
  ControlledDistance out;
  out.per_radius.assign(radii.size(), 0.0);
  for (std::size_t r = 0; r < radii.size(); ++r) {
    const double a = radii[r];
    const auto k0 = static_cast<std::int64_t>(std::ceil(-a / A.step - 1e-9));
    const auto k1 = static_cast<std::int64_t>(std::floor(a / A.step + 1e-9));
    if (k0 < A.lo || k1 > A.hi) throw RangeError("radius " + std::to_string(a) + " exceeds the controlled field's window");
    double fsup = 0.0, gsup = 0.0, fh = 0.0, gh = 0.0;
    const double apow = std::pow(a, -beta / 2.0);
    for (std::size_t M = 0; M < nt; ++M) {
      for (std::int64_t x = k0; x <= k1; ++x) {
        const double f1 = fdiff(M, x), g1 = gdiff(M, x);
        fsup = std::max(fsup, std::abs(f1));
        gsup = std::max(gsup, std::abs(g1));
        for (std::size_t m = 0; m <= M; ++m) {
          const double ds = std::pow(std::abs(A.times[M] - A.times[m]), beta / 2.0);
          const std::int64_t yend = (m == M) ? x - 1 : k1;
          for (std::int64_t y = k0; y <= yend; ++y) {
            const double den = ds + std::pow(std::abs(static_cast<double>(x - y)) * A.step, beta);
            if (den == 0.0) continue;
            fh = std::max(fh, std::abs(f1 - fdiff(m, y)) / den);
            gh = std::max(gh, std::abs(g1 - gdiff(m, y)) / den);
          }
        }
      }
      double rn = 0.0;
      for (std::int64_t i = k0; i <= k1; ++i)
        for (std::int64_t j = k0; j <= k1; ++j)
          if (i != j) rn = std::max(rn, std::abs(rdiff(M, i, j)) * w2b[static_cast<std::size_t>(std::abs(j - i))]);
      const double t = A.times[M];
      const double vpart = fsup + apow * fh, dpart = lg * (gsup + apow * gh), rpart = lg * weight_Q_inv(p.chi, beta, a, t) * rn;
      const double val = (vpart + dpart + rpart) / weight_E(p.theta, p.lambda, a, t);
      out.per_radius[r] = std::max(out.per_radius[r], val);
      if (val > out.joint) {
        out.joint = val;
        out.arg_a = a;
        out.arg_t = t;
        out.value_part = vpart;
        out.derivative_part = dpart;
        out.remainder_part = rpart;
      }
    }
  }
  return out;
}

}  // namespace rwre
