#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwre/couple.hpp"
#include "rwre/env.hpp"
#include "rwre/rough.hpp"
#include "rwre/stats.hpp"

namespace rwre {

// (9 - sqrt 57) / 24 and (3 + sqrt 57) / 24.
double zeta_floor();
double alpha_star();

struct ExperimentConfig {
  EnvironmentSpec spec;
  std::string h = "cos";
  double T = 1.0;
  std::vector<double> deltas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  double delta_ref = 0.00390625;
  bool self_consistency = true;  // also solve the reference at delta_ref / 2
  WeightParams params;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  CouplerKind kind = CouplerKind::Dyadic;
  int bins = 128;
  double window = 64.0;           // Brownian half-window
  double trim_floor = 1e-300;     // forward support trimming
  int resamples = 2000;
  double level = 0.95;
  int jobs = 1;  // worker threads over seeds; <= 0 uses all cores

  void validate() const;
};

struct SeedRow {
  std::uint64_t seed = 0;
  std::vector<double> values;  // E[h(X_T)] per delta
  std::vector<double> errors;  // |value - reference|
  std::vector<double> rho;     // rho(U1 lift, W) per delta
  double reference = 0.0;
  double reference_half = 0.0;  // at delta_ref / 2 (if requested)
  double reference_shift = 0.0; // |reference_half - reference|
  bool self_consistent = true;
  double rate = 0.0;            // per-seed log-log slope
};

struct ConvergenceReport {
  ExperimentConfig cfg;
  std::vector<SeedRow> rows;
  RateFit pooled;          // geometric-mean errors, bootstrap over seeds
  MedianSummary median_rate;
  double zeta = 0.0;
  bool reference_reliable = true;
  bool passes_floor = false;  // median_rate.one_sided_lo > zeta
  std::vector<double> median_errors;
  bool median_errors_monotone = false;
};

ConvergenceReport run_end_to_end(const ExperimentConfig& cfg);

struct DistanceStudyConfig {
  ExperimentConfig base;
  double horizon = 0.25;      // time window of the controlled fields
  std::int64_t time_points = 8;
};

struct DistanceRow {
  double delta = 0.0;
  double d = 0.0;       // controlled distance to the reference field (median over seeds)
  double rho = 0.0;     // median rho
  double bound = 0.0;   // rho + delta^{beta'(beta'-beta)/(beta'+beta)}
  double ratio = 0.0;   // d / bound
};

struct DistanceStudy {
  std::vector<DistanceRow> rows;                 // one per delta plus delta_ref (d = 0)
  std::vector<std::vector<double>> d_by_seed;    // [seed][delta]
  double pooled_C = 0.0;                         // least squares d ~ C bound through 0
  double last_octave_C = 0.0;
  bool stable = false;                           // last octave within 2x of pooled
  bool monotone = false;                         // median d decreasing in delta
};

DistanceStudy controlled_distance_study(const DistanceStudyConfig& cfg);

enum class ExponentMode { ClosedForm, GridSearch, RemarkQuarter };
ExponentMode exponent_mode_from_string(const std::string& s);
std::string to_string(ExponentMode m);

struct ExponentResult {
  ExponentMode mode = ExponentMode::ClosedForm;
  double zeta = 0.0;
  double alpha = 0.0, beta = 0.0, beta2 = 0.0, tau = 0.0;
  std::int64_t evaluations = 0;
};
// Maximizes min(tau, beta'(beta'-beta)/(beta'+beta)) over 0 < tau < 1/2 - alpha,
// 1/3 < beta < beta' < alpha < 1/2 (grid search uses nested refinement), or
// max_alpha min(1/2 - alpha, alpha) for the quarter mode.
ExponentResult optimal_exponent(ExponentMode mode);

}  // namespace rwre
