#include "rwre/kernel.hpp"

#include <cfloat>
#include <cmath>
#include <fstream>
#include "json.hpp"

namespace rwre {

KernelTable::KernelTable(double epsilon, std::int64_t N, std::int64_t K) : epsilon_(epsilon), N_(N), K_(K) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
  if (N < 1) throw ConfigError("kernel depth N must be >= 1");
  if (K < N) throw ConfigError("half-width K=" + std::to_string(K) + " < N=" + std::to_string(N) + " would truncate rows");
  rows_.resize(static_cast<std::size_t>(N + 1));
  const long double e = epsilon, h = (1.0L - e) / 2.0L;
  std::vector<long double> cur{1.0L}, next;
  rows_[0] = {1.0};
  for (std::int64_t n = 0; n < N; ++n) {
    next.assign(static_cast<std::size_t>(n + 2), 0.0L);
    auto at = [&](std::int64_t k) -> long double {
      if (k < 0) k = -k;
      return k <= n ? cur[static_cast<std::size_t>(k)] : 0.0L;
    };
    for (std::int64_t k = 0; k <= n + 1; ++k) next[static_cast<std::size_t>(k)] = e * at(k) + h * (at(k - 1) + at(k + 1));
    cur.swap(next);
    auto& row = rows_[static_cast<std::size_t>(n + 1)];
    row.assign(cur.begin(), cur.end());
  }
}

double KernelTable::row_sum(std::int64_t n) const {
  double s = 0.0, c = 0.0;
  for (std::int64_t k = -n; k <= n; ++k) {
    const double y = p(n, k) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

void KernelTable::export_binary(const std::string& bin_path, const std::string& json_path) const {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + bin_path);
  std::vector<double> row(static_cast<std::size_t>(2 * K_ + 1));
  for (std::int64_t n = 0; n <= N_; ++n) {
    for (std::int64_t k = -K_; k <= K_; ++k) row[static_cast<std::size_t>(k + K_)] = p(n, k);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path);
  js << nlohmann::json{{"epsilon", epsilon_}, {"N", N_}, {"K", K_}}.dump(2) << "\n";
}

KernelTable build_kernel_table(double epsilon, std::int64_t N, std::int64_t K) { return KernelTable(epsilon, N, K); }

double gaussian_kernel(double t, double x, double sigma2) {
  if (!(t > 0.0)) throw std::domain_error("gaussian kernel needs t > 0");
  return std::exp(-x * x / (2.0 * sigma2 * t)) / std::sqrt(2.0 * M_PI * sigma2 * t);
}

double RescaledKernel::p_hat(double t, double x) const {
  const double jn = t / (delta_ * delta_), kn = x / delta_;
  const double j = std::round(jn), k = std::round(kn);
  if (std::abs(jn - j) > 1e-9 * std::max(1.0, j) || std::abs(kn - k) > 1e-9 * std::max(1.0, std::abs(k)))
    throw AlignmentError("kernel queried off the grid at (t,x)=(" + std::to_string(t) + "," + std::to_string(x) + ")");
  return p_hat_index(static_cast<std::int64_t>(j), static_cast<std::int64_t>(k));
}

RescaledKernel rescaled_kernel(const KernelTable& table, double delta) { return RescaledKernel(table, delta); }

double lclt_error(const KernelTable& table, std::int64_t n, int m) {
  if (m != 0 && m != 2 && m != 4) throw ConfigError("lclt order must be 0, 2 or 4");
  const double s2 = table.sigma2();
  auto pd = [&](std::int64_t k) { return table.p(n, k); };
  auto pc = [&](std::int64_t k) { return gaussian_kernel(static_cast<double>(n), static_cast<double>(k), s2); };
  double sup = 0.0;
  for (std::int64_t k = -n; k <= n; ++k) sup = std::max(sup, std::abs(grad(m, pd, k) - grad(m, pc, k)));
  return sup;
}

double BoundScan::last_octave_growth() const {
  const std::size_t N = sup_by_n.size() - 1;
  double full = 0.0, half = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    full = std::max(full, sup_by_n[n]);
    if (n <= N / 2) half = std::max(half, sup_by_n[n]);
  }
  return full / half - 1.0;
}

BoundScan gaussian_bound_scan(const KernelTable& table, int m, double b, std::int64_t n_max) {
  if (!(b > 0.0)) throw ConfigError("scan exponent b must be positive");
  if (n_max < 0) n_max = table.N();
  if (n_max > table.N()) throw RangeError("scan beyond table depth");
  BoundScan r;
  r.sup_by_n.assign(static_cast<std::size_t>(n_max + 1), 0.0);
  const double log_max = std::log(DBL_MAX);
  for (std::int64_t n = 1; n <= n_max; ++n) {
    auto pd = [&](std::int64_t k) { return table.p(n, k); };
    const double lpre = 0.5 * (m + 1) * std::log(static_cast<double>(n));
    double sup = 0.0;
    for (std::int64_t k = -n - 2; k <= n + 2; ++k) {
      const double g = std::abs(grad(m, pd, k));
      if (g == 0.0) continue;
      const double lv = lpre + b * static_cast<double>(k) * static_cast<double>(k) / static_cast<double>(n) + std::log(g);
      if (lv > log_max) {
        r.value = INFINITY;
        r.overflow = true;
        r.arg_n = n;
        r.arg_k = k;
        r.sup_by_n[static_cast<std::size_t>(n)] = INFINITY;
        return r;
      }
      const double v = std::exp(lv);
      if (v > sup) sup = v;
      if (v > r.value) {
        r.value = v;
        r.arg_n = n;
        r.arg_k = k;
      }
    }
    r.sup_by_n[static_cast<std::size_t>(n)] = sup;
  }
  return r;
}

}  // namespace rwre
