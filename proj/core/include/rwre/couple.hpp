#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/env.hpp"
#include "rwre/rough.hpp"
#include "rwre/stats.hpp"

namespace rwre {

// Two-sided Brownian motion with variance rate tau2 on the grid step*Z, sites
// [-K, K]. Increment k covers [(k-1) step, k step]; W(0) = 0.
struct BrownianGrid {
  double tau2 = 1.0;
  double step = 1.0;
  std::int64_t K = 0;
  std::uint64_t seed = 0;
  SiteVector increments;  // sites [-K+1, K]
  SiteVector values;      // sites [-K, K]

  double window() const { return static_cast<double>(K) * step; }
  // Number of grid steps per step delta; throws AlignmentError if delta is off the grid.
  std::int64_t ratio(double delta) const;
  // W(k delta) - W((k-1) delta) for k in [-K/r + 1, K/r].
  SiteVector coarse_increments(double delta) const;
};

BrownianGrid sample_brownian(double tau2, double step, double window, std::uint64_t seed);

enum class CouplerKind { PerStep, Dyadic };
std::string to_string(CouplerKind k);
CouplerKind coupler_kind_from_string(const std::string& s);

// Maps i.i.d. N(0, tau^2) increments g_m to i.i.d. X_m with the law of sigma2*xi,
// tau^2 = sigma2^2 Var(xi).
//   per-step: X = sigma2 F^{-1}(Phi(g / tau)).
//   dyadic: consecutive power-of-two blocks; each block total is the quantile
//   transform of its Gaussian total under the exact lattice sum law, then split
//   recursively with conditional quantiles driven by the independent Gaussian
//   contrasts (G_left - G_right). Non-lattice laws are binned on an equal-width
//   lattice (FFT convolution for the sum laws) and dequantized inside the leaf bin
//   with an auxiliary uniform.
class Coupler {
 public:
  Coupler(XiLaw law, double sigma2, CouplerKind kind, int bins = 128);
  ~Coupler();
  Coupler(Coupler&&) noexcept;
  Coupler& operator=(Coupler&&) noexcept;

  const XiLaw& law() const { return law_; }
  double sigma2() const { return sigma2_; }
  double tau() const { return tau_; }
  CouplerKind kind() const { return kind_; }

  // Leaf m uses the auxiliary stream (aux_seed, aux_offset + m).
  std::vector<double> map(const std::vector<double>& g, std::uint64_t aux_seed = 0, std::int64_t aux_offset = 0) const;

 private:
  struct Lattice;
  XiLaw law_;
  double sigma2_, tau_;
  CouplerKind kind_;
  std::unique_ptr<Lattice> lattice_;
};

// max_{k <= n} |S_k - T_k| of the partial sums.
double max_partial_sum_deviation(const std::vector<double>& x, const std::vector<double>& g);

struct CoupledField {
  double delta = 1.0;
  double epsilon = 0.0;
  CouplerKind kind = CouplerKind::PerStep;
  SiteVector X;        // sigma2 xi
  SiteVector xi;
  SiteVector u_bar1;   // u_bar - u_bar2
  SiteVector u_bar11;  // sqrt(delta) X
  SiteVector u_bar12;  // u_bar1 - u_bar11
  double u_bar2 = 0.0;
  double max_dev = 0.0;  // max over both sides of |S_k - T_k| in unit scale

  RescaledEnvironment environment() const;
};

// Couples W at step delta: site k >= 1 uses the increment over [(k-1)delta, k delta]
// on the positive side, sites k <= 0 the negative side read outward from 0.
// W.tau2 must equal sigma2^2 Var(xi).
CoupledField couple(const BrownianGrid& W, double delta, double epsilon, const Coupler& coupler,
                    std::uint64_t aux_seed = 0);

struct LiftDistance {
  double rho = 0.0;
  std::vector<double> per_radius;
  bool banded = false;
};
// rho_{alpha,chi} between the interpolated u_bar1 path and W, both sampled on the
// grid eval_step (a multiple of W's step dividing delta).
LiftDistance coupled_lift_distance(const BrownianGrid& W, const CoupledField& f, const WeightParams& p,
                                   double eval_step);

struct CouplingStudy {
  std::vector<double> deltas;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> rho;      // [seed][delta]
  std::vector<std::vector<double>> max_dev;  // [seed][delta]
  RateFit fit;
};

struct CouplingStudyConfig {
  double epsilon = 0.2;
  double window = 8.0;     // Brownian half-window; must cover the largest radius
  double fine_step = 0.0;  // 0: min(delta)/8
  int resamples = 1000;
  int jobs = 1;            // worker threads over seeds; <= 0 uses all cores
};

CouplingStudy coupling_rate_study(const Coupler& coupler, const WeightParams& p, const std::vector<double>& deltas,
                                  const std::vector<std::uint64_t>& seeds, const CouplingStudyConfig& cfg);

// Growth of max |S_k - T_k| for blocks n = 2^p, p in [p_min, p_max], from one
// Gaussian sequence of length 2^p_max; each n gets its own coupling.
struct DeviationGrowth {
  std::vector<double> n, max_dev;
  double slope_log = 0.0;  // slope of max_dev against log2 n
  double slope_pow = 0.0;  // slope of log2 max_dev against log2 n
};
DeviationGrowth deviation_growth(const Coupler& coupler, int p_min, int p_max, std::uint64_t seed);

}  // namespace rwre
