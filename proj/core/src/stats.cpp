#include "rwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/common.hpp"
#include "rwre/rng.hpp"

namespace rwre {

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("least squares needs two or more paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0.0) {
    f.slope = std::numeric_limits<double>::quiet_NaN();
    f.intercept = my;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double r = pos - static_cast<double>(i);
  return (1.0 - r) * v[i] + r * v[i + 1];
}

namespace {

std::vector<double> log2_all(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw NumericalError("rate fit needs positive values, got " + std::to_string(v[i]));
    out[i] = std::log2(v[i]);
  }
  return out;
}

void finish(RateFit& r, std::vector<double> boot) {
  const double a = 1.0 - r.level;
  std::erase_if(boot, [](double s) { return !std::isfinite(s); });
  if (boot.empty()) {
    r.ci_lo = r.ci_hi = r.one_sided_lo = r.slope;
    return;
  }
  r.ci_lo = quantile(boot, 0.5 * a);
  r.ci_hi = quantile(boot, 1.0 - 0.5 * a);
  r.one_sided_lo = quantile(boot, a);
}

}  // namespace

RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& metrics, int resamples,
                 std::uint64_t seed, double level) {
  if (resamples < 200) throw ConfigError("at least 200 bootstrap resamples are required");
  RateFit r;
  r.deltas = deltas;
  r.metrics = metrics;
  r.level = level;
  r.resamples = resamples;
  const auto lx = log2_all(deltas), ly = log2_all(metrics);
  const LineFit f = least_squares(lx, ly);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r2 = f.r2;
  r.inconclusive = f.r2 < 0.5;
  Stream st(seed, -1);
  std::vector<double> boot;
  std::vector<double> bx(lx.size()), by(ly.size());
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const auto j = static_cast<std::size_t>(st.next_u64() % lx.size());
      bx[i] = lx[j];
      by[i] = ly[j];
    }
    boot.push_back(least_squares(bx, by).slope);
  }
  finish(r, std::move(boot));
  return r;
}

RateFit fit_rate_seeds(const std::vector<double>& deltas, const std::vector<std::vector<double>>& metrics,
                       int resamples, std::uint64_t seed, double level) {
  if (resamples < 200) throw ConfigError("at least 200 bootstrap resamples are required");
  if (metrics.empty()) throw ConfigError("no seeds to fit");
  const auto lx = log2_all(deltas);
  std::vector<std::vector<double>> ly;
  for (const auto& row : metrics) {
    if (row.size() != deltas.size()) throw ConfigError("metric row length differs from the delta list");
    ly.push_back(log2_all(row));
  }
  const std::size_t S = ly.size(), D = lx.size();
  auto mean_fit = [&](const std::vector<std::size_t>& pick) {
    std::vector<double> y(D, 0.0);
    for (std::size_t s : pick)
      for (std::size_t i = 0; i < D; ++i) y[i] += ly[s][i] / static_cast<double>(pick.size());
    return std::pair{least_squares(lx, y), y};
  };
  std::vector<std::size_t> all(S);
  for (std::size_t s = 0; s < S; ++s) all[s] = s;
  const auto [f, y] = mean_fit(all);
  RateFit r;
  r.deltas = deltas;
  for (double v : y) r.metrics.push_back(std::exp2(v));
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r2 = f.r2;
  r.inconclusive = f.r2 < 0.5;
  r.level = level;
  r.resamples = resamples;
  Stream st(seed, -2);
  std::vector<double> boot;
  std::vector<std::size_t> pick(S);
  for (int b = 0; b < resamples; ++b) {
    for (auto& p : pick) p = static_cast<std::size_t>(st.next_u64() % S);
    boot.push_back(mean_fit(pick).first.slope);
  }
  finish(r, std::move(boot));
  return r;
}

MedianSummary bootstrap_median(const std::vector<double>& values, int resamples, std::uint64_t seed, double level) {
  if (values.empty()) throw ConfigError("no values to summarize");
  if (resamples < 200) throw ConfigError("at least 200 bootstrap resamples are required");
  MedianSummary m;
  m.median = median(values);
  Stream st(seed, -3);
  std::vector<double> boot, pick(values.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& p : pick) p = values[static_cast<std::size_t>(st.next_u64() % values.size())];
    boot.push_back(median(pick));
  }
  const double a = 1.0 - level;
  m.ci_lo = quantile(boot, 0.5 * a);
  m.ci_hi = quantile(boot, 1.0 - 0.5 * a);
  m.one_sided_lo = quantile(boot, a);
  return m;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double F = cdf(samples[i]);
    // left limit of the reference cdf is approximated by its value just below the atom
    const double Fm = cdf(std::nextafter(samples[i], -std::numeric_limits<double>::infinity()));
    d = std::max({d, std::abs(static_cast<double>(j) / n - F), std::abs(static_cast<double>(i) / n - Fm)});
    i = j;
  }
  return d;
}

}  // namespace rwre
