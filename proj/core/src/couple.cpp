#include "rwre/couple.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>

#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr std::int64_t kNegativeAuxOffset = std::int64_t{1} << 40;

double phi_lower(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

}  // namespace

std::int64_t BrownianGrid::ratio(double delta) const {
  const double r = delta / step;
  const double rr = std::round(r);
  if (rr < 1.0 || std::abs(r - rr) > 1e-9 * rr)
    throw AlignmentError("delta " + std::to_string(delta) + " is not a multiple of the Brownian step " + std::to_string(step));
  return static_cast<std::int64_t>(rr);
}

SiteVector BrownianGrid::coarse_increments(double delta) const {
  const std::int64_t r = ratio(delta);
  if (K % r != 0) throw AlignmentError("Brownian window is not a multiple of delta");
  const std::int64_t Kc = K / r;
  SiteVector c(-Kc + 1, static_cast<std::size_t>(2 * Kc));
  for (std::int64_t k = -Kc + 1; k <= Kc; ++k) c[k] = values[k * r] - values[(k - 1) * r];
  return c;
}

BrownianGrid sample_brownian(double tau2, double step, double window, std::uint64_t seed) {
  if (!(step > 0.0)) throw ConfigError("Brownian step must be positive");
  if (!(tau2 > 0.0)) throw ConfigError("Brownian variance must be positive");
  BrownianGrid W;
  W.tau2 = tau2;
  W.step = step;
  W.seed = seed;
  W.K = static_cast<std::int64_t>(std::ceil(window / step - 1e-9));
  const double sd = std::sqrt(tau2 * step);
  W.increments = SiteVector(-W.K + 1, static_cast<std::size_t>(2 * W.K));
  for (std::int64_t k = -W.K + 1; k <= W.K; ++k) W.increments[k] = sd * Stream(seed, k).normal();
  W.values = SiteVector(-W.K, static_cast<std::size_t>(2 * W.K + 1));
  W.values[0] = 0.0;
  for (std::int64_t k = 1; k <= W.K; ++k) W.values[k] = W.values[k - 1] + W.increments[k];
  for (std::int64_t k = 0; k > -W.K; --k) W.values[k - 1] = W.values[k] - W.increments[k];
  return W;
}

std::string to_string(CouplerKind k) { return k == CouplerKind::PerStep ? "per-step" : "dyadic"; }

CouplerKind coupler_kind_from_string(const std::string& s) {
  if (s == "per-step" || s == "per_step" || s == "perstep") return CouplerKind::PerStep;
  if (s == "dyadic") return CouplerKind::Dyadic;
  throw ConfigError("unknown coupler kind '" + s + "' (expected per-step or dyadic)");
}

// Lattice version of the law: variable value origin + i*step for i in [0, nb).
struct Coupler::Lattice {
  double origin = 0.0, step = 1.0;
  std::vector<double> atoms;
  bool binned = false;
  std::vector<double> edges, cdf_at_edges;  // xi units, binned only
  bool binomial = false;
  using Row = std::shared_ptr<const std::vector<double>>;
  struct Levels {
    std::vector<Row> P, logP;
  };
  // sum law of 2^l variables, built on demand
  mutable std::vector<Row> P, logP;
  mutable std::mutex mu;

  // Levels 0..l; safe to call from several threads.
  Levels levels(int l) const {
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int>(P.size()) <= l) {
      const int k = static_cast<int>(P.size());
      std::vector<double> next;
      if (binomial) {
        const double n = std::ldexp(1.0, k);
        next.resize(static_cast<std::size_t>(n) + 1);
        for (std::size_t b = 0; b < next.size(); ++b) {
          const double bb = static_cast<double>(b);
          next[b] = std::exp(std::lgamma(n + 1.0) - std::lgamma(bb + 1.0) - std::lgamma(n - bb + 1.0) - n * M_LN2);
        }
      } else if (k == 0) {
        next = atoms;
      } else {
        next = self_convolve(*P.back());
      }
      std::vector<double> lg(next.size());
      for (std::size_t i = 0; i < next.size(); ++i)
        lg[i] = next[i] > 0.0 ? std::log(next[i]) : -std::numeric_limits<double>::infinity();
      P.push_back(std::make_shared<const std::vector<double>>(std::move(next)));
      logP.push_back(std::make_shared<const std::vector<double>>(std::move(lg)));
    }
    const auto n = static_cast<std::ptrdiff_t>(l) + 1;
    return {{P.begin(), P.begin() + n}, {logP.begin(), logP.begin() + n}};
  }

  static std::vector<double> self_convolve(const std::vector<double>& a) {
    const std::size_t n = a.size(), m = 2 * n - 1;
    std::vector<double> out(m, 0.0);
    if (n <= 2048) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i + j] += a[i] * a[j];
      return out;
    }
    std::size_t L = 1;
    while (L < m) L <<= 1;
    double* buf = fftw_alloc_real(L);
    fftw_complex* spec = fftw_alloc_complex(L / 2 + 1);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(L), buf, spec, FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(L), spec, buf, FFTW_ESTIMATE);
    std::fill(buf, buf + L, 0.0);
    std::copy(a.begin(), a.end(), buf);
    fftw_execute(fwd);
    for (std::size_t i = 0; i <= L / 2; ++i) {
      const std::complex<double> c(spec[i][0], spec[i][1]);
      const std::complex<double> s = c * c;
      spec[i][0] = s.real();
      spec[i][1] = s.imag();
    }
    fftw_execute(inv);
    double peak = 0.0;
    for (std::size_t i = 0; i < m; ++i) peak = std::max(peak, buf[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = buf[i] / static_cast<double>(L);
      // round-off floor of the transform
      out[i] = v > 1e-15 * peak / static_cast<double>(L) * 64.0 ? v : 0.0;
      total += out[i];
    }
    for (auto& v : out) v /= total;
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(buf);
    fftw_free(spec);
    return out;
  }
};

namespace {

// Smallest a with sum_{b<=a} w(b) >= p * total when z <= 0, otherwise the largest a
// with sum_{b>=a} w(b) >= q * total, q = Phi(-z). Returns an offset into w.
std::size_t tail_quantile(const std::vector<double>& w, double z) {
  long double total = 0.0L;
  for (double x : w) total += x;
  if (!(total > 0.0L)) throw NumericalError("lattice quantile with zero total mass");
  if (z <= 0.0) {
    const long double target = static_cast<long double>(phi_lower(z)) * total;
    long double acc = 0.0L;
    for (std::size_t a = 0; a < w.size(); ++a) {
      acc += w[a];
      if (acc >= target && w[a] > 0.0) return a;
    }
    return w.size() - 1;
  }
  const long double target = static_cast<long double>(phi_lower(-z)) * total;
  long double acc = 0.0L;
  for (std::size_t a = w.size(); a-- > 0;) {
    acc += w[a];
    if (acc >= target && w[a] > 0.0) return a;
  }
  return 0;
}

}  // namespace

Coupler::Coupler(XiLaw law, double sigma2, CouplerKind kind, int bins)
    : law_(std::move(law)), sigma2_(sigma2), tau_(sigma2 * std::sqrt(law_.variance())), kind_(kind) {
  if (!(sigma2 > 0.0 && sigma2 <= 1.0)) throw ConfigError("sigma2 must lie in (0, 1]");
  if (std::abs(law_.mean()) > 1e-9) throw ConfigError("coupling requires a centred xi law");
  if (kind_ != CouplerKind::Dyadic || law_.kind() == XiLaw::Kind::Gaussian) return;
  lattice_ = std::make_unique<Lattice>();
  if (law_.kind() == XiLaw::Kind::TwoPoint) {
    lattice_->origin = -sigma2 * law_.xi0();
    lattice_->step = 2.0 * sigma2 * law_.xi0();
    lattice_->atoms = {0.5, 0.5};
    lattice_->binomial = true;
    return;
  }
  if (bins < 2) throw ConfigError("at least two bins are required");
  const double lo = law_.support_lo(), hi = law_.support_hi();
  const double h = (hi - lo) / bins;
  lattice_->binned = true;
  lattice_->origin = sigma2 * (lo + 0.5 * h);
  lattice_->step = sigma2 * h;
  for (int i = 0; i <= bins; ++i) {
    const double e = i == bins ? hi : lo + h * i;
    lattice_->edges.push_back(e);
    lattice_->cdf_at_edges.push_back(i == 0 ? 0.0 : (i == bins ? 1.0 : law_.cdf(e)));
  }
  for (int i = 0; i < bins; ++i)
    lattice_->atoms.push_back(lattice_->cdf_at_edges[static_cast<std::size_t>(i) + 1] - lattice_->cdf_at_edges[static_cast<std::size_t>(i)]);
}

Coupler::~Coupler() = default;
Coupler::Coupler(Coupler&&) noexcept = default;
Coupler& Coupler::operator=(Coupler&&) noexcept = default;

std::vector<double> Coupler::map(const std::vector<double>& g, std::uint64_t aux_seed, std::int64_t aux_offset) const {
  std::vector<double> x(g.size());
  const bool gauss = law_.kind() == XiLaw::Kind::Gaussian;
  if (kind_ == CouplerKind::PerStep || g.empty()) {
    for (std::size_t m = 0; m < g.size(); ++m) {
      const double z = g[m] / tau_;
      if (gauss) {
        x[m] = sigma2_ * law_.sd() * z;
      } else if (z <= 0.0) {
        x[m] = sigma2_ * law_.quantile(std::max(phi_lower(z), std::numeric_limits<double>::min()));
      } else {
        x[m] = sigma2_ * law_.quantile_upper(std::max(phi_lower(-z), std::numeric_limits<double>::min()));
      }
    }
    return x;
  }
  // dyadic: consecutive power-of-two blocks, largest first
  std::size_t start = 0;
  while (start < g.size()) {
    int L = 0;
    while ((std::size_t{1} << (L + 1)) <= g.size() - start) ++L;
    const std::size_t B = std::size_t{1} << L;
    // block-sum pyramid: sums[l][i] is the sum of block i of size 2^l
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(L) + 1);
    sums[0].assign(g.begin() + static_cast<std::ptrdiff_t>(start), g.begin() + static_cast<std::ptrdiff_t>(start + B));
    for (int l = 1; l <= L; ++l) {
      const auto& prev = sums[static_cast<std::size_t>(l) - 1];
      auto& cur = sums[static_cast<std::size_t>(l)];
      cur.resize(prev.size() / 2);
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = prev[2 * i] + prev[2 * i + 1];
    }
    if (gauss) {
      // conditional quantile maps composed analytically
      const double sd_ratio = sigma2_ * law_.sd() / tau_;
      std::vector<double> tot{sd_ratio * sums[static_cast<std::size_t>(L)][0]};
      for (int l = L; l >= 1; --l) {
        const auto& ch = sums[static_cast<std::size_t>(l) - 1];
        std::vector<double> next(tot.size() * 2);
        for (std::size_t i = 0; i < tot.size(); ++i) {
          const double contrast = 0.5 * (ch[2 * i] - ch[2 * i + 1]);
          next[2 * i] = 0.5 * tot[i] + sd_ratio * contrast;
          next[2 * i + 1] = tot[i] - next[2 * i];
        }
        tot.swap(next);
      }
      std::copy(tot.begin(), tot.end(), x.begin() + static_cast<std::ptrdiff_t>(start));
    } else {
      const Lattice& lat = *lattice_;
      const Lattice::Levels lv = lat.levels(L);
      const double nB = static_cast<double>(B);
      std::vector<std::int64_t> tot{static_cast<std::int64_t>(
          tail_quantile(*lv.P[static_cast<std::size_t>(L)], sums[static_cast<std::size_t>(L)][0] / (tau_ * std::sqrt(nB))))};
      std::vector<double> w;
      for (int l = L; l >= 1; --l) {
        const auto& ch = sums[static_cast<std::size_t>(l) - 1];
        const auto& lp = *lv.logP[static_cast<std::size_t>(l) - 1];
        const auto Lc = static_cast<std::int64_t>(lp.size()) - 1;
        const double node = std::ldexp(1.0, l);
        std::vector<std::int64_t> next(tot.size() * 2);
        for (std::size_t i = 0; i < tot.size(); ++i) {
          const std::int64_t s = tot[i];
          const std::int64_t a0 = std::max<std::int64_t>(0, s - Lc), a1 = std::min(s, Lc);
          const double z = (ch[2 * i] - ch[2 * i + 1]) / (tau_ * std::sqrt(node));
          w.assign(static_cast<std::size_t>(a1 - a0 + 1), 0.0);
          double mx = -std::numeric_limits<double>::infinity();
          for (std::int64_t a = a0; a <= a1; ++a) {
            const double v = lp[static_cast<std::size_t>(a)] + lp[static_cast<std::size_t>(s - a)];
            w[static_cast<std::size_t>(a - a0)] = v;
            mx = std::max(mx, v);
          }
          std::int64_t left;
          if (!std::isfinite(mx)) {
            left = std::clamp(s / 2, a0, a1);  // total outside the tabulated support
          } else {
            for (auto& v : w) v = std::exp(v - mx);
            left = a0 + static_cast<std::int64_t>(tail_quantile(w, z));
          }
          next[2 * i] = left;
          next[2 * i + 1] = s - left;
        }
        tot.swap(next);
      }
      for (std::size_t m = 0; m < B; ++m) {
        const auto i = tot[m];
        if (!lat.binned) {
          x[start + m] = lat.origin + static_cast<double>(i) * lat.step;
          continue;
        }
        const auto bi = static_cast<std::size_t>(i);
        const double v = Stream(aux_seed, aux_offset + static_cast<std::int64_t>(start + m)).uniform();
        double p = lat.cdf_at_edges[bi] + v * (lat.cdf_at_edges[bi + 1] - lat.cdf_at_edges[bi]);
        p = std::clamp(p, std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
        const double xi = std::clamp(law_.quantile(p), lat.edges[bi], lat.edges[bi + 1]);
        x[start + m] = sigma2_ * xi;
      }
    }
    start += B;
  }
  return x;
}

double max_partial_sum_deviation(const std::vector<double>& x, const std::vector<double>& g) {
  if (x.size() != g.size()) throw ConfigError("sequence lengths differ");
  long double S = 0.0L, T = 0.0L;
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    S += x[k];
    T += g[k];
    m = std::max(m, static_cast<double>(std::fabs(S - T)));
  }
  return m;
}

RescaledEnvironment CoupledField::environment() const {
  return RescaledEnvironment::from_xi(epsilon, delta, xi, u_bar2);
}

CoupledField couple(const BrownianGrid& W, double delta, double epsilon, const Coupler& coupler, std::uint64_t aux_seed) {
  const double s2 = 1.0 - epsilon;
  if (std::abs(s2 - coupler.sigma2()) > 1e-15) throw ConfigError("coupler built for a different epsilon");
  const double tau2 = coupler.tau() * coupler.tau();
  if (std::abs(W.tau2 - tau2) > 1e-12 * tau2)
    throw ConfigError("Brownian variance " + std::to_string(W.tau2) + " differs from sigma2^2 Var(xi) = " + std::to_string(tau2));
  const SiteVector c = W.coarse_increments(delta);
  const std::int64_t Kc = c.hi();
  const double sd = std::sqrt(delta);
  std::vector<double> gp(static_cast<std::size_t>(Kc)), gn(static_cast<std::size_t>(Kc));
  for (std::int64_t i = 0; i < Kc; ++i) {
    gp[static_cast<std::size_t>(i)] = c[i + 1] / sd;
    gn[static_cast<std::size_t>(i)] = c[-i] / sd;
  }
  const auto xp = coupler.map(gp, aux_seed, 1);
  const auto xn = coupler.map(gn, aux_seed, kNegativeAuxOffset);
  CoupledField f;
  f.delta = delta;
  f.epsilon = epsilon;
  f.kind = coupler.kind();
  f.max_dev = std::max(max_partial_sum_deviation(xp, gp), max_partial_sum_deviation(xn, gn));
  f.X = SiteVector(c.lo, c.size());
  f.xi = SiteVector(c.lo, c.size());
  for (std::int64_t i = 0; i < Kc; ++i) {
    f.X[i + 1] = xp[static_cast<std::size_t>(i)];
    f.X[-i] = xn[static_cast<std::size_t>(i)];
  }
  for (std::int64_t k = c.lo; k <= c.hi(); ++k) f.xi[k] = f.X[k] / s2;
  f.u_bar2 = u_bar2(coupler.law(), s2, delta);
  const RescaledEnvironment renv = f.environment();
  f.u_bar1 = renv.u_bar1;
  f.u_bar11 = SiteVector(c.lo, c.size());
  f.u_bar12 = SiteVector(c.lo, c.size());
  for (std::int64_t k = c.lo; k <= c.hi(); ++k) {
    f.u_bar11[k] = sd * f.X[k];
    f.u_bar12[k] = f.u_bar1[k] - f.u_bar11[k];
  }
  return f;
}

LiftDistance coupled_lift_distance(const BrownianGrid& W, const CoupledField& f, const WeightParams& p, double eval_step) {
  const std::int64_t re = W.ratio(eval_step);
  const double q = f.delta / eval_step;
  if (std::abs(q - std::round(q)) > 1e-9 || q < 1.0 - 1e-9)
    throw AlignmentError("evaluation step must divide delta");
  double amax = 0.0;
  for (double a : p.radii) amax = std::max(amax, a);
  const auto n = static_cast<std::int64_t>(std::ceil(amax / eval_step - 1e-9));
  if (n * re > W.K) throw ConfigError("Brownian window smaller than the largest radius");
  const PiecewiseLinearPath U = interpolate_noise(f.u_bar1, f.delta);
  const GridRoughPath A = lift(U, eval_step, -n, n);
  SiteVector wv(-n, static_cast<std::size_t>(2 * n + 1));
  for (std::int64_t k = -n; k <= n; ++k) wv[k] = W.values[k * re];
  const GridRoughPath B = lift(wv, eval_step);
  const WeightedResult r = rho_distance(A, B, p.alpha, p.chi, p.radii);
  return {r.value, r.per_radius, r.banded};
}

CouplingStudy coupling_rate_study(const Coupler& coupler, const WeightParams& p, const std::vector<double>& deltas,
                                  const std::vector<std::uint64_t>& seeds, const CouplingStudyConfig& cfg) {
  if (deltas.size() < 4) throw ConfigError("coupling rate study needs at least 4 delta values");
  if (seeds.size() < 8) throw ConfigError("coupling rate study needs at least 8 seeds");
  const double dmin = *std::min_element(deltas.begin(), deltas.end());
  const double fine = cfg.fine_step > 0.0 ? cfg.fine_step : dmin / 8.0;
  CouplingStudy st;
  st.deltas = deltas;
  st.seeds = seeds;
  st.rho.resize(seeds.size());
  st.max_dev.resize(seeds.size());
  parallel_for(seeds.size(), cfg.jobs, [&](std::size_t si) {
    const std::uint64_t s = seeds[si];
    const BrownianGrid W = sample_brownian(coupler.tau() * coupler.tau(), fine, cfg.window, s);
    for (double d : deltas) {
      const CoupledField f = couple(W, d, cfg.epsilon, coupler, s);
      st.rho[si].push_back(coupled_lift_distance(W, f, p, fine).rho);
      st.max_dev[si].push_back(f.max_dev);
    }
  });
  st.fit = fit_rate_seeds(deltas, st.rho, cfg.resamples, seeds.front());
  return st;
}

DeviationGrowth deviation_growth(const Coupler& coupler, int p_min, int p_max, std::uint64_t seed) {
  if (p_min < 1 || p_max < p_min + 1 || p_max > 30) throw ConfigError("invalid block exponent range");
  const std::size_t n = std::size_t{1} << p_max;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = coupler.tau() * Stream(seed, static_cast<std::int64_t>(i)).normal();
  DeviationGrowth out;
  std::vector<double> lx, ly;
  for (int q = p_min; q <= p_max; ++q) {
    const std::vector<double> sub(g.begin(), g.begin() + (std::ptrdiff_t{1} << q));
    const double dev = max_partial_sum_deviation(coupler.map(sub, seed, 0), sub);
    out.n.push_back(static_cast<double>(sub.size()));
    out.max_dev.push_back(dev);
    lx.push_back(q);
    ly.push_back(std::log2(std::max(dev, 1e-300)));
  }
  out.slope_log = least_squares(lx, out.max_dev).slope;
  out.slope_pow = least_squares(lx, ly).slope;
  return out;
}

}  // namespace rwre
