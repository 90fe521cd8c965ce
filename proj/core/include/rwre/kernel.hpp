#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwre/common.hpp"

namespace rwre {

// n-step transition probabilities of the lazy symmetric walk with one-step law
// {epsilon at 0, (1-epsilon)/2 at +-1}. Rows are stored for k >= 0 only.
class KernelTable {
 public:
  KernelTable(double epsilon, std::int64_t N, std::int64_t K);

  double epsilon() const { return epsilon_; }
  double sigma2() const { return 1.0 - epsilon_; }
  std::int64_t N() const { return N_; }
  std::int64_t K() const { return K_; }

  double p(std::int64_t n, std::int64_t k) const {
    if (k < 0) k = -k;
    if (n < 0 || n > N_) throw RangeError("kernel row " + std::to_string(n) + " beyond table depth " + std::to_string(N_));
    if (k > n) return 0.0;
    return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
  }
  // Entries k = 0..n of row n (the row is symmetric).
  const double* half_row(std::int64_t n) const { return rows_.at(static_cast<std::size_t>(n)).data(); }
  // Full row on [-n, n], compensated sum.
  double row_sum(std::int64_t n) const;

  // Binary row-major f64 over k in [-K, K] plus JSON sidecar {epsilon,N,K}.
  void export_binary(const std::string& bin_path, const std::string& json_path) const;

 private:
  double epsilon_;
  std::int64_t N_, K_;
  std::vector<std::vector<double>> rows_;
};

KernelTable build_kernel_table(double epsilon, std::int64_t N, std::int64_t K);

// (2 pi sigma2 t)^{-1/2} exp(-x^2 / (2 sigma2 t)).
double gaussian_kernel(double t, double x, double sigma2);

// Discrete differences on the grid delta*Z of a site function f(k).
//   m=1 forward, m=2 centered second, m=3 forward of second, m=4 centered fourth.
template <class F>
double grad(int m, const F& f, std::int64_t k, double delta = 1.0) {
  switch (m) {
    case 0: return f(k);
    case 1: return (f(k + 1) - f(k)) / delta;
    case 2: return (f(k + 1) + f(k - 1) - 2.0 * f(k)) / (delta * delta);
    case 3: return ((f(k + 2) + f(k) - 2.0 * f(k + 1)) - (f(k + 1) + f(k - 1) - 2.0 * f(k))) / (delta * delta * delta);
    case 4: {
      const double d2 = delta * delta;
      return (f(k + 2) - 4.0 * f(k + 1) + 6.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (d2 * d2);
    }
    default: throw ConfigError("gradient order must be in 0..4");
  }
}

template <class F>
double grad_centered(const F& f, std::int64_t k, double delta = 1.0) {
  return (f(k + 1) - f(k - 1)) / (2.0 * delta);
}

// p_hat(t, x) = p^d_{t/delta^2}(x/delta) / delta on the grid.
class RescaledKernel {
 public:
  RescaledKernel(const KernelTable& table, double delta) : table_(&table), delta_(delta) {}
  double delta() const { return delta_; }
  double p_hat_index(std::int64_t j, std::int64_t k) const { return table_->p(j, k) / delta_; }
  double p_delta_index(std::int64_t j, std::int64_t k) const { return table_->p(j, k); }
  // Off-grid queries throw AlignmentError.
  double p_hat(double t, double x) const;
  const KernelTable& table() const { return *table_; }

 private:
  const KernelTable* table_;
  double delta_;
};

RescaledKernel rescaled_kernel(const KernelTable& table, double delta);

// sup_{|k| <= n} |grad^m p^d_n(k) - grad^m p_n(k)| against the variance-sigma2 Gaussian.
double lclt_error(const KernelTable& table, std::int64_t n, int m);

struct BoundScan {
  double value = 0.0;           // sup over scanned (n, k)
  std::int64_t arg_n = 0, arg_k = 0;
  bool overflow = false;        // value is +inf at (arg_n, arg_k)
  std::vector<double> sup_by_n; // index n (0 unused)
  // sup over n <= N divided by sup over n <= N/2, minus one.
  double last_octave_growth() const;
};

// sup over 1 <= n <= n_max, k of n^{(m+1)/2} exp(b k^2 / n) |grad^m p^d_n(k)|.
BoundScan gaussian_bound_scan(const KernelTable& table, int m, double b, std::int64_t n_max = -1);

}  // namespace rwre
