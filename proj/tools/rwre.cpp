// Command-line front end. Each experiment is a subcommand; parameters come from
// built-in defaults, then an optional flat JSON config file, then flags.
//
// Exit codes: 0 success, 1 acceptance failure, 2 usage/config error, 3 numerical error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwre/couple.hpp"
#include "rwre/env.hpp"
#include "rwre/harness.hpp"
#include "rwre/io.hpp"
#include "rwre/kernel.hpp"
#include "rwre/pde.hpp"
#include "rwre/stats.hpp"

using nlohmann::json;
using namespace rwre;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2, kNumerical = 3;

// Parameters of one subcommand. Each has a JSON default; a flag of the same name
// (dashes for underscores) overrides the config file, which overrides the default.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  void real(const std::string& key, json def, const std::string& help) {
    add<double>(key, std::move(def), help);
  }
  void integer(const std::string& key, json def, const std::string& help) {
    add<std::int64_t>(key, std::move(def), help);
  }
  void text(const std::string& key, json def, const std::string& help) {
    add<std::string>(key, std::move(def), help);
  }
  void reals(const std::string& key, json def, const std::string& help) {
    add<std::vector<double>>(key, std::move(def), help);
  }
  void integers(const std::string& key, json def, const std::string& help) {
    add<std::vector<std::int64_t>>(key, std::move(def), help);
  }
  void flag(const std::string& key, bool def, const std::string& help) {
    auto v = std::make_shared<bool>(def);
    defaults_[key] = def;
    opts_[key] = app_->add_flag("--" + dashed(key) + ",!--no-" + dashed(key), *v, help);
    getters_[key] = [v] { return json(*v); };
  }

  // Defaults < config file < flags.
  json resolve(const std::string& config_path) const {
    json eff = defaults_;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      json file;
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
      }
      if (!file.is_object()) throw ConfigError("config file must hold a flat JSON object");
      for (auto it = file.begin(); it != file.end(); ++it) {
        const std::string key = undashed(it.key());
        if (!defaults_.contains(key)) throw ConfigError("unknown config key '" + it.key() + "'");
        eff[key] = it.value();
      }
    }
    for (const auto& [key, opt] : opts_)
      if (opt->count() > 0) eff[key] = getters_.at(key)();
    return eff;
  }

 private:
  static std::string dashed(std::string s) {
    for (auto& c : s)
      if (c == '_') c = '-';
    return s;
  }
  static std::string undashed(std::string s) {
    for (auto& c : s)
      if (c == '-') c = '_';
    return s;
  }

  template <class T>
  void add(const std::string& key, json def, const std::string& help) {
    auto v = std::make_shared<T>();
    defaults_[key] = std::move(def);
    CLI::Option* o = app_->add_option("--" + dashed(key), *v, help);
    if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<std::int64_t>>) o->take_all();
    opts_[key] = o;
    getters_[key] = [v] { return json(*v); };
  }

  CLI::App* app_;
  json defaults_ = json::object();
  std::map<std::string, CLI::Option*> opts_;
  std::map<std::string, std::function<json()>> getters_;
};

template <class T>
T get(const json& c, const std::string& key) {
  try {
    return c.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("parameter '" + key + "': " + e.what());
  }
}

std::vector<std::uint64_t> seed_list(const json& c) {
  const auto base = get<std::int64_t>(c, "seed"), n = get<std::int64_t>(c, "seeds");
  if (base < 0 || n < 1) throw ConfigError("seed must be >= 0 and seeds >= 1");
  std::vector<std::uint64_t> s;
  for (std::int64_t i = 0; i < n; ++i) s.push_back(static_cast<std::uint64_t>(base + i));
  return s;
}

bool power_of_two(double d) {
  int e = 0;
  return d > 0.0 && std::frexp(d, &e) == 0.5;
}

void warn_non_dyadic(const std::vector<double>& deltas) {
  for (double d : deltas)
    if (!power_of_two(d)) std::cerr << "warning: delta " << d << " is not a power of two; grids may not nest\n";
}

EnvironmentSpec spec_from(const json& c) {
  const auto law = get<std::string>(c, "law");
  const double eps = get<double>(c, "epsilon"), kappa = get<double>(c, "kappa_ell");
  EnvironmentSpec s;
  if (law == "two-point") {
    s = EnvironmentSpec::two_point(eps, get<double>(c, "half_spread"), kappa);
  } else if (law == "scaled-beta") {
    s = EnvironmentSpec::scaled_beta(eps, get<double>(c, "beta_a"), get<double>(c, "beta_b"), kappa);
  } else {
    throw ConfigError("unknown environment law '" + law + "' (expected two-point or scaled-beta)");
  }
  s.validate();
  return s;
}

WeightParams weights_from(const json& c) {
  WeightParams p;
  p.alpha = get<double>(c, "alpha");
  p.beta = get<double>(c, "beta");
  p.beta2 = get<double>(c, "beta2");
  p.chi = get<double>(c, "chi");
  p.theta = get<double>(c, "theta");
  p.lambda = get<double>(c, "lambda");
  p.radii = get<std::vector<double>>(c, "radii");
  p.validate();
  return p;
}

void add_env_params(Params& p) {
  p.real("epsilon", 0.2, "laziness epsilon; sigma^2 = 1 - epsilon");
  p.text("law", "two-point", "environment law: two-point or scaled-beta");
  p.real("half_spread", 0.2, "two-point law: omega+ = sigma^2/2 +- half_spread");
  p.real("beta_a", 2.0, "scaled-beta law: first shape parameter");
  p.real("beta_b", 2.0, "scaled-beta law: second shape parameter");
  p.real("kappa_ell", 0.01, "ellipticity margin");
}

void add_weight_params(Params& p, const WeightParams& d) {
  p.real("alpha", d.alpha, "Holder exponent alpha");
  p.real("beta", d.beta, "controlled-remainder exponent beta");
  p.real("beta2", d.beta2, "exponent beta'");
  p.real("chi", d.chi, "radius weight exponent chi");
  p.real("theta", d.theta, "exponential weight theta");
  p.real("lambda", d.lambda, "time weight lambda");
  p.reals("radii", d.radii, "radii a of the weighted norms");
}

std::string out_path(const json& c, const std::string& name) { return get<std::string>(c, "out") + "/" + name; }

void echo(const std::string& cmd, const json& c) {
  json e = c;
  e["subcommand"] = cmd;
  std::cout << e.dump(2) << std::endl;
  write_file(out_path(c, cmd + "_config.json"), e.dump(2) + "\n");
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::setprecision(digits) << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------- kernel

int cmd_kernel(const json& c) {
  if (c.at("n").is_null()) throw CLI::RequiredError("--n");
  const auto N = get<std::int64_t>(c, "n");
  if (N < 2) throw ConfigError("--n must be at least 2");
  const double eps = get<double>(c, "epsilon");
  const double s2 = 1.0 - eps;
  const double b = c.at("b").is_null() ? 1.0 / (8.0 * s2) : get<double>(c, "b");
  const auto orders = get<std::vector<std::int64_t>>(c, "orders");
  const KernelTable table(eps, N, N);

  std::ostringstream lclt;
  lclt << "n,m,error\n";
  json summary{{"N", N}, {"epsilon", eps}, {"b", b}, {"lclt", json::array()}, {"bound", json::array()}};
  for (std::int64_t m : orders) {
    std::vector<double> lx, ly;
    for (std::int64_t n = 1; n <= N; n *= 2) {
      const double e = lclt_error(table, n, static_cast<int>(m));
      lclt << n << ',' << m << ',' << std::setprecision(17) << e << '\n';
      if (n >= 64 && e > 0.0) {
        lx.push_back(std::log2(static_cast<double>(n)));
        ly.push_back(std::log2(e));
      }
    }
    json row{{"m", m}};
    row["slope"] = lx.size() >= 2 ? json(least_squares(lx, ly).slope) : json(nullptr);
    summary["lclt"].push_back(row);
  }
  write_file(out_path(c, "kernel_lclt.csv"), lclt.str());

  std::ostringstream bound;
  bound << "m,n,sup\n";
  for (int m : {0, 2, 4}) {
    const BoundScan s = gaussian_bound_scan(table, m, b);
    for (std::size_t n = 1; n < s.sup_by_n.size(); ++n) bound << m << ',' << n << ',' << std::setprecision(17) << s.sup_by_n[n] << '\n';
    summary["bound"].push_back({{"m", m},
                                {"value", s.overflow ? json("inf") : json(s.value)},
                                {"arg_n", s.arg_n},
                                {"arg_k", s.arg_k},
                                {"overflow", s.overflow},
                                {"last_octave_growth", s.overflow ? json(nullptr) : json(s.last_octave_growth())}});
  }
  write_file(out_path(c, "kernel_bound.csv"), bound.str());
  write_file(out_path(c, "kernel_summary.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << std::endl;
  return kOk;
}

// ---------------------------------------------------------------- pde-check

int cmd_pde_check(const json& c) {
  const EnvironmentSpec spec = spec_from(c);
  const auto deltas = get<std::vector<double>>(c, "delta");
  if (deltas.empty()) throw ConfigError("at least one --delta is required");
  warn_non_dyadic(deltas);
  const auto N = get<std::int64_t>(c, "steps"), A = get<std::int64_t>(c, "window");
  const double tol = get<double>(c, "tolerance");
  if (N < 1 || A < 1) throw ConfigError("steps and window must be positive");
  if (!(tol >= 0.0)) throw ConfigError("tolerance must be nonnegative");
  const auto anchors = get<std::vector<std::int64_t>>(c, "anchors");
  const InitialFn f0 = fns::by_name(get<std::string>(c, "fn"));
  const bool forcing = get<bool>(c, "forcing");
  const ForcingFn g = forcing ? ForcingFn([](double t, double x) { return std::sin(x) * std::exp(-t); }) : ForcingFn{};
  const KernelTable table(spec.epsilon, N, N);

  json rows = json::array();
  double worst = 0.0;
  for (double d : deltas) {
    for (std::uint64_t seed : seed_list(c)) {
      const RescaledEnvironment renv = rescale_environment(sample_environment(spec, A + N + 8, seed), d);
      const GridFunction direct = solve_direct(renv, f0, g, N, A + 3);
      const double mild = max_difference(direct, solve_mild(renv, f0, g, N, A, table), A);
      const IbpReport ibp = ibp_identity_check(renv, direct, f0, g, A, anchors, table);
      const double r = std::max({mild, ibp.max_residual(), ibp.anchor_spread});
      worst = std::max(worst, r);
      rows.push_back({{"delta", d},
                      {"seed", seed},
                      {"mild_vs_direct", mild},
                      {"j_residual", ibp.j_residual},
                      {"grad_residual", ibp.grad_residual},
                      {"grad_hat_residual", ibp.grad_hat_residual},
                      {"anchor_spread", ibp.anchor_spread},
                      {"pass", r <= tol}});
    }
  }
  const bool pass = worst <= tol;
  const json report{{"tolerance", tol}, {"max_residual", worst}, {"pass", pass}, {"rows", rows}};
  write_file(out_path(c, "pde_check.json"), report.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
  if (!pass) std::cerr << "pde-check: max residual " << worst << " exceeds tolerance " << tol << "\n";
  return pass ? kOk : kFail;
}

// ---------------------------------------------------------------- couple / rate

XiLaw coupling_law(const json& c, const EnvironmentSpec* spec) {
  const auto law = get<std::string>(c, "law");
  if (law == "gaussian") {
    const double sd = get<double>(c, "xi_sd");
    if (!(sd > 0.0)) throw ConfigError("xi_sd must be positive");
    return XiLaw::gaussian(sd);
  }
  if (!spec) throw ConfigError("environment law required");
  return XiLaw::from_spec(*spec);
}

EnvironmentSpec coupling_spec(const json& c) {
  json e = c;
  if (get<std::string>(c, "law") == "gaussian") e["law"] = "two-point";  // only epsilon is used
  return spec_from(e);
}

std::vector<CouplerKind> coupler_kinds(const json& c) {
  const auto m = get<std::string>(c, "coupler");
  if (m == "both") return {CouplerKind::PerStep, CouplerKind::Dyadic};
  return {coupler_kind_from_string(m)};
}

void add_coupling_params(Params& p) {
  add_env_params(p);
  p.real("xi_sd", 1.0, "standard deviation of xi for the gaussian control law");
  p.text("coupler", "both", "coupling mode: per-step, dyadic or both");
  p.integer("bins", 128, "lattice bins for non-lattice laws");
  p.real("window", 8.0, "Brownian half-window");
  p.real("fine_step", 0.0, "Brownian grid step (0: smallest delta / 8)");
  p.integer("resamples", 1000, "bootstrap resamples");
  p.integer("seeds", 8, "number of consecutive seeds starting at --seed");
  WeightParams w;
  w.alpha = 0.4;
  w.beta = 0.34;
  w.beta2 = 0.38;
  w.chi = 0.12;
  w.radii = {1.0, 2.0};
  add_weight_params(p, w);
}

CouplingStudyConfig study_config(const json& c, const EnvironmentSpec& spec) {
  CouplingStudyConfig s;
  s.epsilon = spec.epsilon;
  s.window = get<double>(c, "window");
  s.fine_step = get<double>(c, "fine_step");
  s.resamples = static_cast<int>(get<std::int64_t>(c, "resamples"));
  s.jobs = static_cast<int>(get<std::int64_t>(c, "jobs"));
  return s;
}

int cmd_couple(const json& c) {
  const EnvironmentSpec spec = coupling_spec(c);
  const XiLaw law = coupling_law(c, &spec);
  const auto deltas = get<std::vector<double>>(c, "delta");
  warn_non_dyadic(deltas);
  const auto p_min = static_cast<int>(get<std::int64_t>(c, "p_min")), p_max = static_cast<int>(get<std::int64_t>(c, "p_max"));
  const WeightParams w = weights_from(c);
  const auto seeds = seed_list(c);
  const CouplingStudyConfig sc = study_config(c, spec);
  const auto bins = static_cast<int>(get<std::int64_t>(c, "bins"));

  std::string csv;
  std::ostringstream growth;
  growth << "mode,seed,n,max_dev\n";
  json report{{"modes", json::array()}};
  for (CouplerKind k : coupler_kinds(c)) {
    const Coupler coupler(law, spec.sigma2(), k, bins);
    const CouplingStudy st = coupling_rate_study(coupler, w, deltas, seeds, sc);
    const std::string t = coupling_csv(st, k);
    csv += csv.empty() ? t : t.substr(t.find('\n') + 1);
    json slopes = json::array();
    for (std::uint64_t s : seeds) {
      const DeviationGrowth g = deviation_growth(coupler, p_min, p_max, s);
      for (std::size_t i = 0; i < g.n.size(); ++i)
        growth << to_string(k) << ',' << s << ',' << g.n[i] << ',' << std::setprecision(17) << g.max_dev[i] << '\n';
      slopes.push_back({{"seed", s}, {"slope_log", g.slope_log}, {"slope_pow", g.slope_pow}});
    }
    json m = json::parse(to_json(st, k));
    m["deviation_growth"] = slopes;
    report["modes"].push_back(m);
  }
  write_file(out_path(c, "coupling.csv"), csv);
  write_file(out_path(c, "deviation_growth.csv"), growth.str());
  write_file(out_path(c, "coupling.json"), report.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
  return kOk;
}

int cmd_rate(const json& c) {
  const EnvironmentSpec spec = coupling_spec(c);
  const XiLaw law = coupling_law(c, &spec);
  const auto deltas = get<std::vector<double>>(c, "delta");
  warn_non_dyadic(deltas);
  const auto kinds = coupler_kinds(c);
  if (kinds.size() != 1) throw ConfigError("rate needs a single coupler mode (per-step or dyadic)");
  const Coupler coupler(law, spec.sigma2(), kinds.front(), static_cast<int>(get<std::int64_t>(c, "bins")));
  const CouplingStudy st = coupling_rate_study(coupler, weights_from(c), deltas, seed_list(c), study_config(c, spec));
  write_file(out_path(c, "rate.csv"), coupling_csv(st, kinds.front()));
  const std::string j = to_json(st, kinds.front());
  write_file(out_path(c, "rate.json"), j + "\n");
  std::cout << j << std::endl;
  // a rate is established when the one-sided lower bound of the slope is positive
  const bool pass = st.fit.one_sided_lo > 0.0;
  if (!pass) std::cerr << "rate: slope lower bound " << st.fit.one_sided_lo << " is not positive\n";
  return pass ? kOk : kFail;
}

// ---------------------------------------------------------------- end2end

int cmd_end2end(const json& c) {
  ExperimentConfig e;
  e.spec = spec_from(c);
  e.h = get<std::string>(c, "fn");
  e.T = get<double>(c, "T");
  e.deltas = get<std::vector<double>>(c, "delta");
  warn_non_dyadic(e.deltas);
  e.delta_ref = get<double>(c, "delta_ref");
  e.self_consistency = get<bool>(c, "self_consistency");
  e.params = weights_from(c);
  e.seeds = seed_list(c);
  e.kind = coupler_kind_from_string(get<std::string>(c, "coupler"));
  e.bins = static_cast<int>(get<std::int64_t>(c, "bins"));
  e.window = get<double>(c, "window");
  e.trim_floor = get<double>(c, "trim_floor");
  e.resamples = static_cast<int>(get<std::int64_t>(c, "resamples"));
  e.level = get<double>(c, "level");
  e.jobs = static_cast<int>(get<std::int64_t>(c, "jobs"));
  e.validate();

  const ConvergenceReport r = run_end_to_end(e);
  write_file(out_path(c, "end2end.json"), to_json(r) + "\n");
  write_file(out_path(c, "values.csv"), values_csv(r));
  if (get<bool>(c, "distance")) {
    DistanceStudyConfig d;
    d.base = e;
    d.horizon = get<double>(c, "horizon");
    d.time_points = get<std::int64_t>(c, "time_points");
    const DistanceStudy s = controlled_distance_study(d);
    write_file(out_path(c, "distance.json"), to_json(s) + "\n");
    write_file(out_path(c, "distance.csv"), distance_csv(s));
  }
  const json summary{{"median_rate", r.median_rate.median},
                     {"one_sided_lo", r.median_rate.one_sided_lo},
                     {"zeta", r.zeta},
                     {"pooled_slope", r.pooled.slope},
                     {"reference_reliable", r.reference_reliable},
                     {"median_errors_monotone", r.median_errors_monotone},
                     {"passes_floor", r.passes_floor}};
  std::cout << summary.dump(2) << std::endl;
  if (!r.passes_floor)
    std::cerr << "end2end: one-sided lower bound " << r.median_rate.one_sided_lo << " does not exceed zeta " << r.zeta << "\n";
  return r.passes_floor ? kOk : kFail;
}

// ---------------------------------------------------------------- exponent

int cmd_exponent(const json& c) {
  const ExponentResult e = optimal_exponent(exponent_mode_from_string(get<std::string>(c, "mode")));
  write_file(out_path(c, "exponent.json"), to_json(e) + "\n");
  std::cout << "zeta = " << fixed(e.zeta, 10) << "\n";
  if (e.mode != ExponentMode::RemarkQuarter) {
    std::cout << "alpha = " << fixed(e.alpha, 10) << "\n"
              << "beta = " << fixed(e.beta, 10) << "\nbeta' = " << fixed(e.beta2, 10) << "\ntau = " << fixed(e.tau, 10) << "\n";
  }
  if (e.mode == ExponentMode::GridSearch) {
    const double gap = std::abs(e.zeta - zeta_floor());
    std::cout << "closed form zeta = " << fixed(zeta_floor(), 10) << " (difference " << gap << ", " << e.evaluations
              << " evaluations)\n";
    if (gap > 1e-3) return kFail;
  }
  return kOk;
}

// ---------------------------------------------------------------- env-dump

int cmd_env_dump(const json& c) {
  const EnvironmentSpec spec = spec_from(c);
  const auto radius = get<std::int64_t>(c, "radius");
  if (radius < 1) throw ConfigError("radius must be positive");
  const auto deltas = get<std::vector<double>>(c, "delta");
  if (deltas.size() != 1) throw ConfigError("env-dump takes exactly one --delta");
  warn_non_dyadic(deltas);
  const auto seed = static_cast<std::uint64_t>(get<std::int64_t>(c, "seed"));
  const Environment env = sample_environment(spec, radius, seed);
  const RescaledEnvironment r = rescale_environment(env, deltas.front());
  double m = 0.0, q = 0.0;
  for (std::int64_t k = -radius; k <= radius; ++k) {
    m += r.u_bar[k];
    q += r.u_bar[k] * r.u_bar[k];
  }
  const double n = static_cast<double>(2 * radius + 1);
  m /= n;
  const json summary{{"sites", 2 * radius + 1},
                     {"delta", r.delta},
                     {"u_bar2", r.u_bar2},
                     {"xi_variance", xi_variance(spec)},
                     {"brownian_variance", brownian_variance(spec)},
                     {"u_bar_mean", m},
                     {"u_bar_variance_over_delta", (q / n - m * m) / r.delta}};
  write_file(out_path(c, "fields.csv"), fields_csv(r));
  write_file(out_path(c, "environment.json"), to_json(env) + "\n");
  write_file(out_path(c, "env_summary.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << std::endl;
  return kOk;
}

struct Command {
  CLI::App* app;
  std::unique_ptr<Params> params;
  std::function<int(const json&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in random environment: discretization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rwre 1.0");
  std::string config_path;
  int verbosity = 0;

  std::map<std::string, Command> cmds;
  auto make = [&](const std::string& name, const std::string& help, std::function<int(const json&)> run) -> Params& {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat JSON file with parameter values (flags take precedence)");
    sub->add_flag("-v,--verbose", verbosity, "more output");
    auto p = std::make_unique<Params>(sub);
    p->text("out", "rwre_out", "output directory");
    p->integer("seed", 1, "global seed");
    p->integer("jobs", 0, "worker threads (0: all cores)");
    Params& ref = *p;
    cmds[name] = Command{sub, std::move(p), std::move(run)};
    return ref;
  };

  {
    Params& p = make("kernel", "discrete heat kernel tables, local CLT errors and Gaussian bound scans", cmd_kernel);
    p.integer("n", nullptr, "table depth N (required)");
    p.real("epsilon", 0.2, "laziness epsilon");
    p.real("b", nullptr, "Gaussian bound exponent (default 1/(8 sigma^2))");
    p.integers("orders", std::vector<std::int64_t>{0, 2, 4}, "difference orders for the local CLT sweep");
  }
  {
    Params& p = make("pde-check", "direct/mild equality and summation-by-parts identities", cmd_pde_check);
    add_env_params(p);
    p.reals("delta", std::vector<double>{0.0625}, "grid step(s) (repeatable)");
    p.integer("steps", 64, "time steps N");
    p.integer("window", 8, "output half-window in sites");
    p.integer("seeds", 3, "number of consecutive seeds starting at --seed");
    p.text("fn", "cos", "initial datum: cos, gauss, xgauss, bump");
    p.flag("forcing", true, "add the forcing sin(x) exp(-t)");
    p.integers("anchors", std::vector<std::int64_t>{-3, 5}, "summation anchors (sites)");
    p.real("tolerance", 1e-9, "maximum admissible residual");
  }
  {
    Params& p = make("couple", "coupling of environment increments with Brownian increments", cmd_couple);
    add_coupling_params(p);
    p.reals("delta", std::vector<double>{0.25, 0.125, 0.0625, 0.03125, 0.015625}, "grid steps (repeatable)");
    p.integer("p_min", 6, "smallest block exponent of the deviation-growth sweep");
    p.integer("p_max", 14, "largest block exponent of the deviation-growth sweep");
  }
  {
    Params& p = make("rate", "rate of the lift distance between coupled noise and Brownian motion", cmd_rate);
    add_coupling_params(p);
    p.reals("delta", std::vector<double>{0.25, 0.125, 0.0625, 0.03125, 0.015625}, "grid steps (repeatable)");
  }
  {
    const ExperimentConfig d;
    Params& p = make("end2end", "convergence rate of quenched expectations to the reference", cmd_end2end);
    add_env_params(p);
    add_weight_params(p, d.params);
    p.text("fn", d.h, "test function: cos, gauss, xgauss, bump");
    p.real("T", d.T, "time horizon");
    p.reals("delta", d.deltas, "grid steps (repeatable)");
    p.real("delta_ref", d.delta_ref, "reference grid step");
    p.flag("self_consistency", d.self_consistency, "also solve the reference at delta_ref/2");
    p.integer("seeds", static_cast<std::int64_t>(d.seeds.size()), "number of consecutive seeds starting at --seed");
    p.text("coupler", to_string(d.kind), "coupling mode: per-step or dyadic");
    p.integer("bins", d.bins, "lattice bins for non-lattice laws");
    p.real("window", d.window, "Brownian half-window");
    p.real("trim_floor", d.trim_floor, "forward propagation trimming floor");
    p.integer("resamples", d.resamples, "bootstrap resamples");
    p.real("level", d.level, "confidence level");
    p.flag("distance", false, "also run the controlled-distance study");
    p.real("horizon", 0.25, "controlled-distance time window");
    p.integer("time_points", 8, "controlled-distance time samples");
  }
  {
    Params& p = make("exponent", "optimal rate exponent", cmd_exponent);
    p.text("mode", "closed-form", "closed-form, grid-search or remark-quarter");
  }
  {
    Params& p = make("env-dump", "sample an environment and write its fields", cmd_env_dump);
    add_env_params(p);
    p.integer("radius", 1000, "sites -radius..radius");
    p.reals("delta", std::vector<double>{0.0625}, "grid step");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  for (auto& [name, cmd] : cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      const json eff = cmd.params->resolve(config_path);
      echo(name, eff);
      if (verbosity > 0) std::cerr << name << ": running\n";
      return cmd.run(eff);
    } catch (const CLI::RequiredError& e) {
      std::cerr << "usage error: " << e.what() << " is required\n" << cmd.app->help();
      return kUsage;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kUsage;
    } catch (const AlignmentError& e) {
      std::cerr << "alignment error: " << e.what() << "\n";
      return kUsage;
    } catch (const RangeError& e) {
      std::cerr << "range error: " << e.what() << "\n";
      return kUsage;
    } catch (const NumericalError& e) {
      std::cerr << "numerical error: " << e.what() << "\n";
      return kNumerical;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kNumerical;
    }
  }
  return kUsage;
}
