#pragma once

#include <string>

#include "rwre/couple.hpp"
#include "rwre/harness.hpp"
#include "rwre/stats.hpp"

namespace rwre {

void write_file(const std::string& path, const std::string& content);

// JSON documents (pretty-printed).
std::string to_json(const RateFit& f);
// {spec, radius, seed, omega_plus}; parsed back by environment_from_json.
std::string to_json(const Environment& env);
Environment environment_from_json(const std::string& text);
std::string to_json(const ConvergenceReport& r);
std::string to_json(const DistanceStudy& s);
std::string to_json(const ExponentResult& e);
std::string to_json(const CouplingStudy& s, CouplerKind kind);

// CSV tables.
std::string fields_csv(const RescaledEnvironment& r);  // x,omega_plus,u_dot,u_bar,u_bar1
std::string values_csv(const ConvergenceReport& r);   // seed,delta,value,error
std::string distance_csv(const DistanceStudy& s);     // delta,rho,d,bound
std::string coupling_csv(const CouplingStudy& s, CouplerKind kind);  // delta,mode,max_dev,rho,seed

}  // namespace rwre
