#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwre {

// Error taxonomy. Each maps to a CLI exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense values on consecutive integer sites lo, lo+1, ..., lo+size-1.
struct SiteVector {
  std::int64_t lo = 0;
  std::vector<double> v;

  SiteVector() = default;
  SiteVector(std::int64_t lo_, std::size_t n, double fill = 0.0) : lo(lo_), v(n, fill) {}

  std::int64_t hi() const { return lo + static_cast<std::int64_t>(v.size()) - 1; }
  std::size_t size() const { return v.size(); }
  bool contains(std::int64_t k) const { return k >= lo && k <= hi(); }
  double& operator[](std::int64_t k) { return v[static_cast<std::size_t>(k - lo)]; }
  const double& operator[](std::int64_t k) const { return v[static_cast<std::size_t>(k - lo)]; }
  double at(std::int64_t k) const {
    if (!contains(k)) throw RangeError("site " + std::to_string(k) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi()) + "]");
    return (*this)[k];
  }
};

// Number of time steps N with T = N * delta^2; throws if T is off the grid.
inline std::int64_t steps_for_time(double T, double delta) {
  const double n = T / (delta * delta);
  const double r = std::round(n);
  if (r < 0 || std::abs(n - r) > 1e-9 * std::max(1.0, r))
    throw AlignmentError("time " + std::to_string(T) + " is not on the grid of step " + std::to_string(delta * delta));
  return static_cast<std::int64_t>(r);
}

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace rwre
