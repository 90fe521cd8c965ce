#include "rwre/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "rwre/walk.hpp"

namespace rwre {

std::size_t GridFunction::slot(std::int64_t j) const {
  auto it = std::lower_bound(time_index.begin(), time_index.end(), j);
  if (it == time_index.end() || *it != j) throw RangeError("time index " + std::to_string(j) + " not stored");
  return static_cast<std::size_t>(it - time_index.begin());
}

bool GridFunction::has_time(std::int64_t j) const { return std::binary_search(time_index.begin(), time_index.end(), j); }

void GridFunction::export_binary(const std::string& bin_path, const std::string& json_path, std::int64_t A) const {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + bin_path);
  for (const auto& s : slices)
    for (std::int64_t k = -A; k <= A; ++k) {
      const double v = s.at(k);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path);
  js << nlohmann::json{{"delta", delta}, {"N", N}, {"window", {-A, A}}, {"time_index", time_index}}.dump(2) << "\n";
}

namespace fns {
InitialFn gaussian_bump(double c, double w) {
  return [c, w](double x) { return std::exp(-(x - c) * (x - c) / (w * w)); };
}
InitialFn cosine(double freq) {
  return [freq](double x) { return std::cos(freq * x); };
}
InitialFn compact_bump(double r) {
  return [r](double x) {
    const double u = x / r;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return s * s * s * s;
  };
}
InitialFn polynomial(double c0, double c1, double c2, double c3) {
  return [=](double x) { return c0 + x * (c1 + x * (c2 + x * c3)); };
}
InitialFn x_gauss() {
  return [](double x) { return x * std::exp(-x * x); };
}
InitialFn by_name(const std::string& name) {
  if (name == "cos") return cosine();
  if (name == "gauss") return gaussian_bump();
  if (name == "xgauss") return x_gauss();
  if (name == "bump") return compact_bump(2.0);
  throw ConfigError("unknown test function '" + name + "' (expected cos, gauss, xgauss, bump)");
}
}  // namespace fns

namespace {

void require_env(const RescaledEnvironment& renv, std::int64_t lo, std::int64_t hi, const char* what) {
  if (!renv.contains(lo) || !renv.contains(hi))
    throw ConfigError(std::string(what) + ": environment window [" + std::to_string(renv.omega_plus.lo) + ", " +
                      std::to_string(renv.omega_plus.hi()) + "] smaller than the required [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
}

double forcing(const ForcingFn& g, double t, double x) { return g ? g(t, x) : 0.0; }

// Free kernel p^d_n(d), zero outside the support.
struct Kern {
  const KernelTable& T;
  double operator()(std::int64_t n, std::int64_t d) const {
    if (d < 0) d = -d;
    return d <= n ? T.half_row(n)[d] : 0.0;
  }
};

// sum_{|d| <= n} row[|d|] c[-d] for a pointer c into contiguous storage.
double symmetric_sum(const double* row, std::int64_t n, const double* c) {
  double s = row[0] * c[0];
  for (std::int64_t d = 1; d <= n; ++d) s += row[d] * (c[d] + c[-d]);
  return s;
}

void require_table(const KernelTable& table, std::int64_t N, double epsilon) {
  if (table.N() < N) throw ConfigError("kernel table depth " + std::to_string(table.N()) + " < " + std::to_string(N));
  if (std::abs(table.epsilon() - epsilon) > 1e-15) throw ConfigError("kernel table built for a different epsilon");
}

}  // namespace

GridFunction solve_direct(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                          std::int64_t A) {
  if (N < 0 || A < 0) throw ConfigError("negative N or window");
  require_env(renv, -A - N, A + N, "solve_direct");
  const double d = renv.delta, d2 = d * d;
  GridFunction gf;
  gf.delta = d;
  gf.N = N;
  gf.time_index.resize(static_cast<std::size_t>(N + 1));
  gf.slices.resize(static_cast<std::size_t>(N + 1));
  SiteVector f(-A - N, static_cast<std::size_t>(2 * (A + N) + 1));
  for (std::int64_t k = f.lo; k <= f.hi(); ++k) f[k] = f0(static_cast<double>(k) * d);
  gf.time_index[0] = 0;
  gf.slices[0] = f;
  for (std::int64_t j = 0; j < N; ++j) {
    SiteVector next = apply_transition(renv, gf.slices[static_cast<std::size_t>(j)]);
    if (g) {
      const double t = static_cast<double>(j) * d2;
      for (std::int64_t k = next.lo; k <= next.hi(); ++k) next[k] += d2 * g(t, static_cast<double>(k) * d);
    }
    gf.time_index[static_cast<std::size_t>(j + 1)] = j + 1;
    gf.slices[static_cast<std::size_t>(j + 1)] = std::move(next);
  }
  return gf;
}

std::int64_t safe_margin(double sigma2, std::int64_t N) {
  return static_cast<std::int64_t>(std::ceil(std::sqrt(2.0 * sigma2 * static_cast<double>(N) * 70.0))) + 2;
}

GridFunction solve_direct_windowed(const RescaledEnvironment& renv, const InitialFn& f0, std::int64_t N, std::int64_t A,
                                   std::int64_t margin, std::int64_t stride) {
  if (stride < 1) throw ConfigError("stride must be >= 1");
  const std::int64_t lo = -A - margin, hi = A + margin;
  require_env(renv, lo, hi, "solve_direct_windowed");
  const double d = renv.delta, eps = renv.epsilon, s2 = renv.sigma2();
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> f(n), nf(n);
  for (std::int64_t k = lo; k <= hi; ++k) f[static_cast<std::size_t>(k - lo)] = f0(static_cast<double>(k) * d);
  nf = f;
  const double* wp = &renv.omega_plus[lo];
  GridFunction gf;
  gf.delta = d;
  gf.N = N;
  auto store = [&](std::int64_t j) {
    SiteVector s(-A - 1, static_cast<std::size_t>(2 * A + 3));
    for (std::int64_t k = s.lo; k <= s.hi(); ++k) s[k] = f[static_cast<std::size_t>(k - lo)];
    gf.time_index.push_back(j);
    gf.slices.push_back(std::move(s));
  };
  store(0);
  for (std::int64_t j = 1; j <= N; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) nf[i] = wp[i] * f[i + 1] + (s2 - wp[i]) * f[i - 1] + eps * f[i];
    std::swap(f, nf);
    if (j % stride == 0 || j == N) store(j);
  }
  return gf;
}

GridFunction solve_mild(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                        std::int64_t A, const KernelTable& table) {
  require_env(renv, -A - N, A + N, "solve_mild");
  require_table(table, N, renv.epsilon);
  const double d = renv.delta, d2 = d * d;
  SiteVector init(-A - N, static_cast<std::size_t>(2 * (A + N) + 1));
  for (std::int64_t k = init.lo; k <= init.hi(); ++k) init[k] = f0(static_cast<double>(k) * d);
  GridFunction gf;
  gf.delta = d;
  gf.N = N;
  gf.time_index.push_back(0);
  gf.slices.push_back(init);
  std::vector<SiteVector> H;  // H_l(y) = delta^2 g_l(y) + delta u_dot(y) grad_hat f_l(y)
  for (std::int64_t j = 1; j <= N; ++j) {
    const auto& fl = gf.slices.back();
    SiteVector h(fl.lo + 1, fl.size() - 2);
    const double tl = static_cast<double>(j - 1) * d2;
    for (std::int64_t y = h.lo; y <= h.hi(); ++y)
      h[y] = d2 * forcing(g, tl, static_cast<double>(y) * d) + 0.5 * renv.u_dot[y] * (fl[y + 1] - fl[y - 1]);
    H.push_back(std::move(h));
    const std::int64_t R = A + N - j;
    SiteVector fj(-R, static_cast<std::size_t>(2 * R + 1));
    for (std::int64_t x = -R; x <= R; ++x) {
      double s = symmetric_sum(table.half_row(j), j, &init[x]);
      for (std::int64_t l = 0; l < j; ++l) s += symmetric_sum(table.half_row(j - 1 - l), j - 1 - l, &H[static_cast<std::size_t>(l)][x]);
      fj[x] = s;
    }
    gf.time_index.push_back(j);
    gf.slices.push_back(std::move(fj));
  }
  return gf;
}

double max_difference(const GridFunction& a, const GridFunction& b, std::int64_t A) {
  double m = 0.0;
  for (std::int64_t j : a.time_index) {
    if (!b.has_time(j)) continue;
    const auto& sa = a.slice(j);
    const auto& sb = b.slice(j);
    for (std::int64_t k = -A; k <= A; ++k) m = std::max(m, std::abs(sa.at(k) - sb.at(k)));
  }
  return m;
}

namespace {

// Duhamel part G_j(x) = sum_y p_j(x-y) f0(y) + delta^2 sum_l sum_y p_{j-1-l}(x-y) g_l(y).
double duhamel(const Kern& p, const SiteVector& init, const ForcingFn& g, double d, std::int64_t j, std::int64_t x) {
  double s = 0.0;
  for (std::int64_t y = x - j; y <= x + j; ++y) s += p(j, x - y) * init.at(y);
  if (g) {
    for (std::int64_t l = 0; l < j; ++l) {
      const std::int64_t n = j - 1 - l;
      const double tl = static_cast<double>(l) * d * d;
      for (std::int64_t y = x - n; y <= x + n; ++y) s += d * d * p(n, x - y) * g(tl, static_cast<double>(y) * d);
    }
  }
  return s;
}

}  // namespace

IbpReport ibp_identity_check(const RescaledEnvironment& renv, const GridFunction& direct, const InitialFn& f0,
                             const ForcingFn& g, std::int64_t A, const std::vector<std::int64_t>& anchors,
                             const KernelTable& table) {
  const std::int64_t N = direct.N;
  require_table(table, N, renv.epsilon);
  if (anchors.empty()) throw ConfigError("no anchors given");
  const auto& s0 = direct.slice(0);
  if (s0.hi() < A + N + 2) throw ConfigError("direct solution must cover the window A+2");
  for (std::int64_t a : anchors)
    if (std::abs(a) > A) throw ConfigError("anchor outside the output window");
  const Kern p{table};
  const double d = renv.delta;
  SiteVector init(s0.lo, s0.size());
  for (std::int64_t k = init.lo; k <= init.hi(); ++k) init[k] = f0(static_cast<double>(k) * d);

  // term_l(z) = u_dot(z) grad_hat f_l(z) and its prefix P_l with P_l(lo_l) = 0.
  std::vector<SiteVector> term(static_cast<std::size_t>(N)), pref(static_cast<std::size_t>(N));
  for (std::int64_t l = 0; l < N; ++l) {
    const auto& fl = direct.slice(l);
    SiteVector t(fl.lo + 1, fl.size() - 2), P(fl.lo, fl.size() - 1);
    P[fl.lo] = 0.0;
    for (std::int64_t z = t.lo; z <= t.hi(); ++z) {
      t[z] = renv.u_dot[z] * (fl[z + 1] - fl[z - 1]) / (2.0 * d);
      P[z] = P[z - 1] + t[z];
    }
    term[static_cast<std::size_t>(l)] = std::move(t);
    pref[static_cast<std::size_t>(l)] = std::move(P);
  }
  auto I = [&](std::int64_t l, std::int64_t a, std::int64_t y) {
    const auto& P = pref[static_cast<std::size_t>(l)];
    return P.at(y) - P.at(a + 1);
  };

  IbpReport r;
  for (std::int64_t j = 1; j <= N; ++j) {
    const auto& fj = direct.slice(j);
    for (std::int64_t x = -A; x <= A; ++x) {
      // original noise term
      double J = 0.0;
      for (std::int64_t l = 0; l < j; ++l) {
        const std::int64_t n = j - 1 - l;
        const auto& t = term[static_cast<std::size_t>(l)];
        for (std::int64_t y = x - n; y <= x + n; ++y) J += d * p(n, x - y) * t.at(y);
      }
      r.j_scale = std::max(r.j_scale, std::abs(J));
      const double G0 = duhamel(p, init, g, d, j, x);
      const double Gp = duhamel(p, init, g, d, j, x + 1);
      const double Gm = duhamel(p, init, g, d, j, x - 1);
      const double grad_f = (fj.at(x + 1) - fj.at(x)) / d;
      const double grad_hat_f = (fj.at(x + 1) - fj.at(x - 1)) / (2.0 * d);
      double first = 0.0;
      for (std::size_t ai = 0; ai < anchors.size(); ++ai) {
        const std::int64_t a = anchors[ai];
        double Jb = 0.0, Dg = 0.0, Dh = 0.0;
        for (std::int64_t l = 0; l < j; ++l) {
          const std::int64_t n = j - 1 - l;
          for (std::int64_t y = x - n - 2; y <= x + n + 1; ++y) {
            const double Iy = I(l, a, y);
            Jb += (p(n, x - y) - p(n, x - 1 - y)) * Iy;
            Dg += (p(n, x - y + 1) + p(n, x - y - 1) - 2.0 * p(n, x - y)) * Iy;
            Dh += 0.5 * (p(n, x + 1 - y) - p(n, x - y) - p(n, x - 1 - y) + p(n, x - 2 - y)) * Iy;
          }
        }
        Jb *= d;
        r.j_residual = std::max(r.j_residual, std::abs(Jb - J));
        r.grad_residual = std::max(r.grad_residual, std::abs(grad_f - ((Gp - G0) / d + Dg)));
        r.grad_hat_residual = std::max(r.grad_hat_residual, std::abs(grad_hat_f - ((Gp - Gm) / (2.0 * d) + Dh)));
        if (ai == 0) first = Jb;
        else r.anchor_spread = std::max(r.anchor_spread, std::abs(Jb - first));
      }
    }
  }
  return r;
}

double default_derivative_factor(double sigma2) { return -2.0 / sigma2; }

double noise_sum(const SiteVector& v, const SiteVector& u_bar, std::int64_t x, std::int64_t y) {
  double s = 0.0;
  if (y >= x) {
    for (std::int64_t z = x; z <= y; ++z) s += 0.5 * (v.at(z) + v.at(z - 1)) * u_bar.at(z);
  } else {
    for (std::int64_t z = y + 1; z <= x - 1; ++z) s -= 0.5 * (v.at(z) + v.at(z - 1)) * u_bar.at(z);
  }
  return s;
}

namespace {

GridFunction forward_gradient(const GridFunction& f) {
  GridFunction v;
  v.delta = f.delta;
  v.N = f.N;
  v.time_index = f.time_index;
  for (const auto& s : f.slices) {
    SiteVector g(s.lo, s.size() - 1);
    for (std::int64_t k = g.lo; k <= g.hi(); ++k) g[k] = (s[k + 1] - s[k]) / f.delta;
    v.slices.push_back(std::move(g));
  }
  return v;
}

}  // namespace

VDeltaSolution build_v_delta(const RescaledEnvironment& renv, const InitialFn& f0, const ForcingFn& g, std::int64_t N,
                             std::int64_t A, const KernelTable* table) {
  VDeltaSolution sol;
  sol.delta = renv.delta;
  sol.epsilon = renv.epsilon;
  sol.derivative_factor = default_derivative_factor(renv.sigma2());
  sol.f = solve_direct(renv, f0, g, N, A + 3);
  sol.v = forward_gradient(sol.f);
  if (!table) return sol;
  require_table(*table, N, renv.epsilon);
  const Kern p{*table};
  const double d = renv.delta;
  const auto& s0 = sol.f.slice(0);
  SiteVector init(s0.lo, s0.size());
  for (std::int64_t k = init.lo; k <= init.hi(); ++k) init[k] = f0(static_cast<double>(k) * d);
  // prefix of the trapezoidal noise terms, per time
  std::vector<SiteVector> Q(static_cast<std::size_t>(N));
  for (std::int64_t m = 0; m < N; ++m) {
    const auto& v = sol.v.slice(m);
    SiteVector q(v.lo, v.size());
    q[v.lo] = 0.0;
    for (std::int64_t z = v.lo + 1; z <= v.hi(); ++z) q[z] = q[z - 1] + 0.5 * (v[z] + v[z - 1]) * renv.u_bar[z];
    Q[static_cast<std::size_t>(m)] = std::move(q);
  }
  double res = 0.0, j0 = 0.0;
  for (std::int64_t k = 0; k <= N; ++k) {
    const auto& vk = sol.v.slice(k);
    for (std::int64_t x = -A; x <= A; ++x) {
      // eta: forward gradient of the Duhamel part
      const double eta = (duhamel(p, init, g, d, k, x + 1) - duhamel(p, init, g, d, k, x)) / d;
      double sum = 0.0;
      for (std::int64_t j = 0; j < k; ++j) {
        const auto& q = Q[static_cast<std::size_t>(k - 1 - j)];
        const double qx = q.at(x - 1);
        double part = 0.0;
        for (std::int64_t y = x - j - 1; y <= x + j + 1; ++y)
          part += (p(j, x - y + 1) + p(j, x - y - 1) - 2.0 * p(j, x - y)) * (q.at(y) - qx);
        if (j == 0) j0 = std::max(j0, std::abs(0.5 * part));
        sum += part;
      }
      const double veq = eta - 0.5 * sum;
      res = std::max(res, std::abs(veq - vk.at(x)));
    }
  }
  sol.v_equation_residual = res;
  sol.j0_contribution = j0;
  return sol;
}

VDeltaSolution build_v_delta(double epsilon, double delta, const SiteVector& u_bar, const InitialFn& f0,
                             const ForcingFn& g, std::int64_t N, std::int64_t A, const KernelTable* table) {
  return build_v_delta(RescaledEnvironment::from_noise(epsilon, delta, u_bar), f0, g, N, A, table);
}

VDeltaSolution build_v_delta_windowed(const RescaledEnvironment& renv, const InitialFn& f0, std::int64_t N,
                                      std::int64_t A, std::int64_t stride) {
  VDeltaSolution sol;
  sol.delta = renv.delta;
  sol.epsilon = renv.epsilon;
  sol.derivative_factor = default_derivative_factor(renv.sigma2());
  sol.f = solve_direct_windowed(renv, f0, N, A, safe_margin(renv.sigma2(), N), stride);
  sol.v = forward_gradient(sol.f);
  return sol;
}

double VDeltaSolution::interpolate(double t, double x) const {
  const double d2 = delta * delta;
  // time bracket among stored slices
  double tq = std::max(t, d2);
  const auto& ti = v.time_index;
  const double jt = tq / d2;
  auto it = std::lower_bound(ti.begin(), ti.end(), static_cast<std::int64_t>(std::ceil(jt - 1e-9)));
  if (it == ti.end()) throw RangeError("interpolation time beyond the solution horizon");
  const std::size_t s2 = static_cast<std::size_t>(it - ti.begin());
  auto space = [&](std::size_t s) {
    const auto& sl = v.slices[s];
    const double u = x / delta;
    const double x2 = std::ceil(u - 1e-12);
    const auto k2 = static_cast<std::int64_t>(x2);
    const double w = x2 - u;  // weight of the left point x1 = k2 - 1
    if (w <= 1e-12) return sl.at(k2);
    return w * sl.at(k2 - 1) + (1.0 - w) * sl.at(k2);
  };
  const double t2 = static_cast<double>(ti[s2]);
  if (std::abs(t2 - jt) < 1e-9 || s2 == 0) return space(s2);
  const double t1 = static_cast<double>(ti[s2 - 1]);
  const double w = (t2 - jt) / (t2 - t1);
  return w * space(s2 - 1) + (1.0 - w) * space(s2);
}

}  // namespace rwre
