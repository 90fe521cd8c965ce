#include "rwre/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace rwre {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("write failed for " + path);
}

namespace {

json fit_json(const RateFit& f) {
  json pts = json::array();
  for (std::size_t i = 0; i < f.deltas.size(); ++i) pts.push_back({f.deltas[i], f.metrics[i]});
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},         {"ci_lo", f.ci_lo},
          {"ci_hi", f.ci_hi}, {"one_sided_lo", f.one_sided_lo}, {"level", f.level}, {"resamples", f.resamples},
          {"inconclusive", f.inconclusive}, {"points", pts}};
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

std::string to_json(const RateFit& f) { return fit_json(f).dump(2); }

std::string to_json(const Environment& env) {
  const EnvironmentSpec& s = env.spec;
  const json spec{{"law", to_string(s.kind)}, {"epsilon", s.epsilon},     {"kappa_ell", s.kappa_ell},
                  {"half_spread", s.half_spread}, {"beta_a", s.beta_a}, {"beta_b", s.beta_b}};
  return json{{"spec", spec}, {"radius", env.radius}, {"seed", env.seed}, {"omega_plus", env.omega_plus.v}}.dump();
}

Environment environment_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const json& s = j.at("spec");
    Environment env;
    env.spec.kind = law_kind_from_string(s.at("law").get<std::string>());
    env.spec.epsilon = s.at("epsilon").get<double>();
    env.spec.kappa_ell = s.at("kappa_ell").get<double>();
    env.spec.half_spread = s.at("half_spread").get<double>();
    env.spec.beta_a = s.at("beta_a").get<double>();
    env.spec.beta_b = s.at("beta_b").get<double>();
    env.spec.validate();
    env.radius = j.at("radius").get<std::int64_t>();
    env.seed = j.at("seed").get<std::uint64_t>();
    env.omega_plus = SiteVector(-env.radius, static_cast<std::size_t>(2 * env.radius + 1));
    env.omega_plus.v = j.at("omega_plus").get<std::vector<double>>();
    if (env.omega_plus.v.size() != static_cast<std::size_t>(2 * env.radius + 1))
      throw ConfigError("omega_plus has " + std::to_string(env.omega_plus.v.size()) + " entries, expected 2 radius + 1");
    return env;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed environment JSON: ") + e.what());
  }
}

std::string to_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (const auto& s : r.rows)
    rows.push_back({{"seed", s.seed},
                    {"values", s.values},
                    {"errors", s.errors},
                    {"rho", s.rho},
                    {"reference", s.reference},
                    {"reference_half", s.reference_half},
                    {"reference_shift", s.reference_shift},
                    {"self_consistent", s.self_consistent},
                    {"rate", s.rate}});
  json j{{"deltas", r.cfg.deltas},
         {"delta_ref", r.cfg.delta_ref},
         {"T", r.cfg.T},
         {"h", r.cfg.h},
         {"coupler", to_string(r.cfg.kind)},
         {"law", to_string(r.cfg.spec.kind)},
         {"epsilon", r.cfg.spec.epsilon},
         {"rows", rows},
         {"pooled_fit", fit_json(r.pooled)},
         {"median_rate", {{"median", r.median_rate.median},
                          {"ci_lo", r.median_rate.ci_lo},
                          {"ci_hi", r.median_rate.ci_hi},
                          {"one_sided_lo", r.median_rate.one_sided_lo}}},
         {"median_errors", r.median_errors},
         {"median_errors_monotone", r.median_errors_monotone},
         {"zeta", r.zeta},
         {"reference_reliable", r.reference_reliable},
         {"reference_note", "reference is the finest-grid solve driven directly by the Brownian increments"},
         {"passes_floor", r.passes_floor}};
  return j.dump(2);
}

std::string to_json(const DistanceStudy& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"delta", r.delta}, {"d", r.d}, {"rho", r.rho}, {"bound", r.bound}, {"ratio", r.ratio}});
  return json{{"rows", rows},
              {"d_by_seed", s.d_by_seed},
              {"pooled_C", s.pooled_C},
              {"last_octave_C", s.last_octave_C},
              {"stable", s.stable},
              {"monotone", s.monotone}}
      .dump(2);
}

std::string to_json(const ExponentResult& e) {
  return json{{"mode", to_string(e.mode)},
              {"zeta", e.zeta},
              {"alpha", e.alpha},
              {"beta", e.beta},
              {"beta2", e.beta2},
              {"tau", e.tau},
              {"evaluations", e.evaluations}}
      .dump(2);
}

std::string to_json(const CouplingStudy& s, CouplerKind kind) {
  return json{{"mode", to_string(kind)},
              {"deltas", s.deltas},
              {"seeds", s.seeds},
              {"rho", s.rho},
              {"max_dev", s.max_dev},
              {"fit", fit_json(s.fit)}}
      .dump(2);
}

std::string values_csv(const ConvergenceReport& r) {
  std::ostringstream o;
  o << "seed,delta,value,error\n";
  for (const auto& s : r.rows) {
    for (std::size_t i = 0; i < r.cfg.deltas.size(); ++i)
      o << s.seed << ',' << num(r.cfg.deltas[i]) << ',' << num(s.values[i]) << ',' << num(s.errors[i]) << '\n';
    o << s.seed << ',' << num(r.cfg.delta_ref) << ',' << num(s.reference) << ",0\n";
  }
  return o.str();
}

std::string fields_csv(const RescaledEnvironment& r) {
  std::ostringstream o;
  o << "x,omega_plus,u_dot,u_bar,u_bar1\n";
  for (std::int64_t k = r.omega_plus.lo; k <= r.omega_plus.hi(); ++k)
    o << num(static_cast<double>(k) * r.delta) << ',' << num(r.omega_plus[k]) << ',' << num(r.u_dot[k]) << ','
      << num(r.u_bar[k]) << ',' << num(r.u_bar1[k]) << '\n';
  return o.str();
}

std::string distance_csv(const DistanceStudy& s) {
  std::ostringstream o;
  o << "delta,rho,d,bound\n";
  for (const auto& r : s.rows) o << num(r.delta) << ',' << num(r.rho) << ',' << num(r.d) << ',' << num(r.bound) << '\n';
  return o.str();
}

std::string coupling_csv(const CouplingStudy& s, CouplerKind kind) {
  std::ostringstream o;
  o << "delta,mode,max_dev,rho,seed\n";
  for (std::size_t k = 0; k < s.seeds.size(); ++k)
    for (std::size_t i = 0; i < s.deltas.size(); ++i)
      o << num(s.deltas[i]) << ',' << to_string(kind) << ',' << num(s.max_dev[k][i]) << ',' << num(s.rho[k][i]) << ','
        << s.seeds[k] << '\n';
  return o.str();
}

}  // namespace rwre
