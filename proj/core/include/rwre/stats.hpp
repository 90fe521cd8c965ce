#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace rwre {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
// Ordinary least squares y = intercept + slope x.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Power-law fit metric ~ C delta^slope on log2 pairs.
struct RateFit {
  std::vector<double> deltas, metrics;  // metrics are per-delta point estimates
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;      // two-sided bootstrap interval
  double one_sided_lo = 0.0;            // lower one-sided bound at the same level
  double level = 0.95;
  int resamples = 0;
  bool inconclusive = false;            // r2 < 0.5
};

// Bootstrap over (delta, metric) pairs.
RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& metrics, int resamples = 1000,
                 std::uint64_t seed = 1, double level = 0.95);
// metrics[s][i] for seed s and delta i. The point estimate fits the per-delta mean
// of log2 metric; the bootstrap resamples seeds.
RateFit fit_rate_seeds(const std::vector<double>& deltas, const std::vector<std::vector<double>>& metrics,
                       int resamples = 1000, std::uint64_t seed = 1, double level = 0.95);

struct MedianSummary {
  double median = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // two-sided percentile bootstrap
  double one_sided_lo = 0.0;        // (1 - level) quantile of the bootstrap medians
};
MedianSummary bootstrap_median(const std::vector<double>& values, int resamples = 2000, std::uint64_t seed = 1,
                               double level = 0.95);

double median(std::vector<double> v);
// Linear-interpolated empirical quantile, p in [0, 1].
double quantile(std::vector<double> v, double p);

// sup_x |F_n(x) - F(x)| for a continuous or discrete reference cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace rwre
