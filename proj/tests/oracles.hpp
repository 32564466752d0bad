#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's factorization and selection routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fbp/linalg.hpp"
#include "fbp/signals.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_rows(const fbp::DenseMatrix& a) {
  Matrix out(a.rows(), std::vector<double>(a.cols()));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out[r][c] = a(r, c);
  return out;
}

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle::invert: singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

// w = (A^T A)^{-1} A^T y with an explicit inverse.
inline std::vector<double> normal_equations(const fbp::DenseMatrix& a, const fbp::DenseVector& y) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix ata(n, std::vector<double>(n, 0.0));
  std::vector<double> aty(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < m; ++r) ata[i][j] += a(r, i) * a(r, j);
    for (std::size_t r = 0; r < m; ++r) aty[i] += a(r, i) * y[r];
  }
  const Matrix inv = invert(ata);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i] += inv[i][j] * aty[j];
  return w;
}

// Naive double loop: out_j = sum_i A(i, j) r_i.
inline std::vector<double> naive_transpose_multiply(const fbp::DenseMatrix& a,
                                                    const fbp::DenseVector& r) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out[j] += a(i, j) * r[i];
  return out;
}

inline std::vector<double> naive_multiply(const fbp::DenseMatrix& a, const std::vector<double>& x) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

// Full stable sort of (|v_i|, i), descending by magnitude for `largest`.
inline std::vector<std::size_t> sorted_by_magnitude(const fbp::DenseVector& v, bool largest) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return largest ? std::fabs(v[a]) > std::fabs(v[b]) : std::fabs(v[a]) < std::fabs(v[b]);
  });
  return idx;
}

inline std::vector<std::size_t> top_k(const fbp::DenseVector& v, std::size_t k,
                                      const std::vector<std::size_t>& exclude = {}) {
  std::vector<std::size_t> out;
  for (std::size_t i : sorted_by_magnitude(v, true)) {
    if (out.size() == k) break;
    if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
    out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::size_t> bottom_k(const fbp::DenseVector& v, std::size_t k) {
  auto idx = sorted_by_magnitude(v, true);
  std::reverse(idx.begin(), idx.end());
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Residual norm of the normal-equations fit of y on the given columns.
inline double fit_residual(const fbp::DenseMatrix& phi, const std::vector<std::size_t>& cols,
                           const fbp::DenseVector& y) {
  fbp::DenseMatrix sub(phi.rows(), cols.size());
  for (std::size_t r = 0; r < phi.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) sub(r, j) = phi(r, cols[j]);
  const auto w = normal_equations(sub, y);
  const auto fitted = naive_multiply(sub, w);
  double s = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) s += (y[r] - fitted[r]) * (y[r] - fitted[r]);
  return std::sqrt(s);
}

// Number of supports with size <= k whose fit residual is <= tol.
inline std::size_t count_fitting_supports(const fbp::DenseMatrix& phi, const fbp::DenseVector& y,
                                          std::size_t k, double tol) {
  std::size_t count = 0;
  const std::size_t n = phi.cols();
  std::vector<std::size_t> comb;
  // Enumerate by bitmask; fine for n <= 24 and small k.
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    const auto bits = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (bits > k) continue;
    comb.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) comb.push_back(i);
    if (fit_residual(phi, comb, y) <= tol) ++count;
  }
  return count;
}

// Success counts for p(rho) = 1 / (1 + exp(-slope (center - rho))), each
// point an independent sum of Bernoulli draws.
inline std::vector<std::size_t> logistic_counts(const std::vector<double>& rho, double center,
                                                double slope, std::size_t trials,
                                                std::uint64_t seed) {
  fbp::Rng rng(seed);
  std::vector<std::size_t> out;
  for (double r : rho) {
    const double p = 1.0 / (1.0 + std::exp(-slope * (center - r)));
    std::size_t s = 0;
    for (std::size_t t = 0; t < trials; ++t) s += rng.uniform() < p ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

// Indices whose coefficient exceeds 1e-9 of the largest, after undoing a column scale.
inline fbp::IndexSet significant_support(const fbp::SparseSignal& x, double scale = 1.0) {
  double peak = 0.0;
  for (double v : x.values) peak = std::max(peak, std::fabs(v * scale));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.support.size(); ++i)
    if (std::fabs(x.values[i] * scale) > 1e-9 * peak) keep.push_back(x.support[i]);
  return fbp::IndexSet(std::move(keep));
}

}  // namespace oracle
