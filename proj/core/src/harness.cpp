#include "rwre/harness.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/parallel.hpp"
#include "rwre/pde.hpp"
#include "rwre/walk.hpp"

namespace rwre {

double zeta_floor() { return (9.0 - std::sqrt(57.0)) / 24.0; }
double alpha_star() { return (3.0 + std::sqrt(57.0)) / 24.0; }

void ExperimentConfig::validate() const {
  spec.validate();
  params.validate();
  if (deltas.size() < 2) throw ConfigError("the delta list needs at least two values");
  if (seeds.empty()) throw ConfigError("no seeds");
  if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
  for (double d : deltas) {
    if (!(d > delta_ref)) throw ConfigError("delta_ref must be smaller than every delta in the list");
    steps_for_time(T, d);
  }
  steps_for_time(T, delta_ref);
  if (resamples < 200) throw ConfigError("at least 200 bootstrap resamples are required");
  fns::by_name(h);
}

namespace {

double rate_of(const std::vector<double>& deltas, const std::vector<double>& errors) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    lx.push_back(std::log2(deltas[i]));
    ly.push_back(std::log2(std::max(errors[i], 1e-300)));
  }
  return least_squares(lx, ly).slope;
}

double smallest(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

double reference_value(const BrownianGrid& W, const ExperimentConfig& cfg, double dref, const InitialFn& h) {
  const RescaledEnvironment renv = RescaledEnvironment::from_noise(cfg.spec.epsilon, dref, W.coarse_increments(dref), 0.0);
  return quenched_expectation_forward(renv, h, steps_for_time(cfg.T, dref), 0, cfg.trim_floor).value;
}

}  // namespace

ConvergenceReport run_end_to_end(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.cfg = cfg;
  rep.zeta = zeta_floor();
  const double s2 = cfg.spec.sigma2();
  const Coupler coupler(XiLaw::from_spec(cfg.spec), s2, cfg.kind, cfg.bins);
  const InitialFn h = fns::by_name(cfg.h);
  const double fine = cfg.self_consistency ? cfg.delta_ref / 2.0 : cfg.delta_ref;
  const double eval = smallest(cfg.deltas) / 2.0;
  rep.rows.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t si) {
    const std::uint64_t seed = cfg.seeds[si];
    SeedRow& row = rep.rows[si];
    row.seed = seed;
    const BrownianGrid W = sample_brownian(coupler.tau() * coupler.tau(), fine, cfg.window, seed);
    for (double d : cfg.deltas) {
      const CoupledField f = couple(W, d, cfg.spec.epsilon, coupler, seed);
      const RescaledEnvironment renv = f.environment();
      row.values.push_back(quenched_expectation_forward(renv, h, steps_for_time(cfg.T, d), 0, cfg.trim_floor).value);
      row.rho.push_back(coupled_lift_distance(W, f, cfg.params, eval).rho);
    }
    row.reference = reference_value(W, cfg, cfg.delta_ref, h);
    for (double v : row.values) row.errors.push_back(std::abs(v - row.reference));
    if (cfg.self_consistency) {
      row.reference_half = reference_value(W, cfg, fine, h);
      row.reference_shift = std::abs(row.reference_half - row.reference);
      row.self_consistent = row.reference_shift < smallest(row.errors);
    }
    row.rate = rate_of(cfg.deltas, row.errors);
  });
  std::vector<std::vector<double>> errs;
  std::vector<double> rates;
  for (const auto& r : rep.rows) {
    errs.push_back(r.errors);
    rates.push_back(r.rate);
    rep.reference_reliable = rep.reference_reliable && r.self_consistent;
  }
  rep.pooled = fit_rate_seeds(cfg.deltas, errs, cfg.resamples, cfg.seeds.front(), cfg.level);
  rep.median_rate = bootstrap_median(rates, cfg.resamples, cfg.seeds.front(), cfg.level);
  rep.passes_floor = rep.median_rate.one_sided_lo > rep.zeta;
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    std::vector<double> col;
    for (const auto& r : rep.rows) col.push_back(r.errors[i]);
    rep.median_errors.push_back(median(col));
  }
  // deltas are listed coarse to fine; errors must shrink along the list
  std::vector<std::size_t> order(cfg.deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.deltas[a] > cfg.deltas[b]; });
  rep.median_errors_monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!(rep.median_errors[order[i]] < rep.median_errors[order[i - 1]])) rep.median_errors_monotone = false;
  return rep;
}

namespace {

// Controlled field of v on the common grid (step dc, sites [-n, n], given times).
SpaceTimeControlled sample_controlled(const VDeltaSolution& sol, const SiteVector& path_sites, double path_step,
                                      double dc, std::int64_t n, const std::vector<double>& times) {
  const double d = sol.delta;
  const auto r = static_cast<std::int64_t>(std::llround(dc / d));
  const auto rp = static_cast<std::int64_t>(std::llround(dc / path_step));
  SpaceTimeControlled s;
  s.step = dc;
  s.lo = -n;
  s.hi = n;
  s.times = times;
  s.X = SiteVector(-n, static_cast<std::size_t>(2 * n + 1));
  for (std::int64_t k = -n; k <= n; ++k) s.X[k] = path_sites.at(k * rp);
  for (double t : times) {
    const std::int64_t j = steps_for_time(t, d);
    std::vector<double> v, dv;
    for (std::int64_t k = -n; k <= n; ++k) {
      const double val = sol.v.at(j, k * r);
      v.push_back(val);
      dv.push_back(sol.derivative_factor * val);
    }
    s.v.push_back(std::move(v));
    s.dv.push_back(std::move(dv));
  }
  return s;
}

}  // namespace

DistanceStudy controlled_distance_study(const DistanceStudyConfig& dcfg) {
  const ExperimentConfig& cfg = dcfg.base;
  cfg.validate();
  if (dcfg.time_points < 1) throw ConfigError("time_points must be positive");
  const double s2 = cfg.spec.sigma2();
  const Coupler coupler(XiLaw::from_spec(cfg.spec), s2, cfg.kind, cfg.bins);
  const InitialFn h = fns::by_name(cfg.h);
  const auto& p = cfg.params;
  double amax = 0.0;
  for (double a : p.radii) amax = std::max(amax, a);
  const double dc = *std::max_element(cfg.deltas.begin(), cfg.deltas.end());
  const auto n = static_cast<std::int64_t>(std::ceil(amax / dc - 1e-9));
  std::vector<double> times;
  for (std::int64_t m = 0; m <= dcfg.time_points; ++m)
    times.push_back(dcfg.horizon * static_cast<double>(m) / static_cast<double>(dcfg.time_points));
  const double eval = smallest(cfg.deltas) / 2.0;
  const double expo = p.beta2 * (p.beta2 - p.beta) / (p.beta2 + p.beta);

  DistanceStudy st;
  std::vector<std::vector<double>> rho_by_seed(cfg.seeds.size());
  st.d_by_seed.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t si) {
    const std::uint64_t seed = cfg.seeds[si];
    const double fine = std::min(cfg.delta_ref, eval);
    const BrownianGrid W = sample_brownian(coupler.tau() * coupler.tau(), fine, cfg.window, seed);
    auto build = [&](const RescaledEnvironment& renv) {
      const double d = renv.delta;
      const std::int64_t N = steps_for_time(dcfg.horizon, d);
      const std::int64_t stride = steps_for_time(dcfg.horizon / static_cast<double>(dcfg.time_points), d);
      const auto A = static_cast<std::int64_t>(std::ceil(amax / d)) + 2;
      return build_v_delta_windowed(renv, h, N, A, stride);
    };
    const RescaledEnvironment ref_env =
        RescaledEnvironment::from_noise(cfg.spec.epsilon, cfg.delta_ref, W.coarse_increments(cfg.delta_ref), 0.0);
    const SpaceTimeControlled ref = sample_controlled(build(ref_env), W.values, W.step, dc, n, times);
    std::vector<double> drow, rrow;
    for (double d : cfg.deltas) {
      const CoupledField f = couple(W, d, cfg.spec.epsilon, coupler, seed);
      const PiecewiseLinearPath U = interpolate_noise(f.u_bar1, d);
      const SpaceTimeControlled A = sample_controlled(build(f.environment()), U.anchors(), d, dc, n, times);
      drow.push_back(controlled_distance(A, &ref, p).joint);
      rrow.push_back(coupled_lift_distance(W, f, p, eval).rho);
    }
    st.d_by_seed[si] = std::move(drow);
    rho_by_seed[si] = std::move(rrow);
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    std::vector<double> dcol, rcol;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      dcol.push_back(st.d_by_seed[s][i]);
      rcol.push_back(rho_by_seed[s][i]);
    }
    DistanceRow row;
    row.delta = cfg.deltas[i];
    row.d = median(dcol);
    row.rho = median(rcol);
    row.bound = row.rho + std::pow(row.delta, expo);
    row.ratio = row.d / row.bound;
    num += row.d * row.bound;
    den += row.bound * row.bound;
    st.rows.push_back(row);
  }
  st.pooled_C = num / den;
  const auto finest = std::min_element(st.rows.begin(), st.rows.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });
  st.last_octave_C = finest->ratio;
  st.stable = std::isfinite(st.pooled_C) && st.last_octave_C <= 2.0 * st.pooled_C && st.last_octave_C >= 0.5 * st.pooled_C;
  auto sorted = st.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  st.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i].d < sorted[i - 1].d)) st.monotone = false;
  DistanceRow self;
  self.delta = cfg.delta_ref;
  st.rows.push_back(self);
  return st;
}

ExponentMode exponent_mode_from_string(const std::string& s) {
  if (s == "closed-form") return ExponentMode::ClosedForm;
  if (s == "grid-search") return ExponentMode::GridSearch;
  if (s == "remark-quarter") return ExponentMode::RemarkQuarter;
  throw ConfigError("unknown exponent mode '" + s + "' (expected closed-form, grid-search or remark-quarter)");
}

std::string to_string(ExponentMode m) {
  switch (m) {
    case ExponentMode::ClosedForm: return "closed-form";
    case ExponentMode::GridSearch: return "grid-search";
    case ExponentMode::RemarkQuarter: return "remark-quarter";
  }
  return "?";
}

ExponentResult optimal_exponent(ExponentMode mode) {
  ExponentResult r;
  r.mode = mode;
  constexpr double third = 1.0 / 3.0;
  switch (mode) {
    case ExponentMode::ClosedForm:
      r.alpha = alpha_star();
      r.zeta = zeta_floor();
      r.tau = 0.5 - r.alpha;
      r.beta2 = r.alpha;
      r.beta = third;
      return r;
    case ExponentMode::RemarkQuarter: {
      // dyadic grid on [0, 1/2]; the maximizer 1/4 is a grid point
      for (int i = 0; i <= 1024; ++i) {
        const double a = 0.5 * i / 1024.0;
        const double v = std::min(0.5 - a, a);
        ++r.evaluations;
        if (v > r.zeta) {
          r.zeta = v;
          r.alpha = a;
        }
      }
      r.tau = 0.5 - r.alpha;
      return r;
    }
    case ExponentMode::GridSearch: {
      // tau enters only through min(tau, Q) with tau < 1/2 - alpha, so its sup is
      // the endpoint. Remaining coordinates: alpha, and u, w in [0, 1] with
      // beta' = 1/3 + u (alpha - 1/3), beta = 1/3 + w (beta' - 1/3).
      auto objective = [](double a, double u, double w, double& b2, double& b) {
        b2 = third + u * (a - third);
        b = third + w * (b2 - third);
        const double q = b2 * (b2 - b) / (b2 + b);
        return std::min(0.5 - a, q);
      };
      double lo[3] = {third, 0.0, 0.0}, hi[3] = {0.5, 1.0, 1.0};
      double best[3] = {0.5 * (third + 0.5), 0.5, 0.5};
      constexpr int G = 21;
      for (int level = 0; level < 30; ++level) {
        double bv = -1.0;
        for (int i = 0; i <= G; ++i)
          for (int j = 0; j <= G; ++j)
            for (int k = 0; k <= G; ++k) {
              const double a = lo[0] + (hi[0] - lo[0]) * i / G;
              const double u = lo[1] + (hi[1] - lo[1]) * j / G;
              const double w = lo[2] + (hi[2] - lo[2]) * k / G;
              double b2, b;
              const double v = objective(a, u, w, b2, b);
              ++r.evaluations;
              if (v > bv) {
                bv = v;
                best[0] = a;
                best[1] = u;
                best[2] = w;
              }
            }
        for (int c = 0; c < 3; ++c) {
          const double span = (hi[c] - lo[c]) / 4.0;
          const double floor_c = c == 0 ? third : 0.0, ceil_c = c == 0 ? 0.5 : 1.0;
          lo[c] = std::max(floor_c, best[c] - span);
          hi[c] = std::min(ceil_c, best[c] + span);
        }
      }
      r.alpha = best[0];
      r.zeta = objective(best[0], best[1], best[2], r.beta2, r.beta);
      r.tau = 0.5 - r.alpha;
      return r;
    }
  }
  return r;
}

}  // namespace rwre
