#pragma once

// Dense real linear algebra used by the pursuit algorithms: row-major
// containers, Householder least squares, correlation, magnitude selection
// and a reproducible 64-bit generator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbp {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientCandidates : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// DenseVector

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}
  explicit DenseVector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) {
  // Scaled accumulation so tiny or huge entries neither underflow nor overflow.
  double scale = 0.0;
  double ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double ax = std::fabs(x);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline DenseVector operator-(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("subtract: length mismatch");
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline DenseVector operator+(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("add: length mismatch");
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline DenseVector operator*(double c, const DenseVector& a) {
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

// ---------------------------------------------------------------------------
// DenseMatrix, row-major.

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("DenseMatrix: data length != rows * cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }

  DenseVector column(std::size_t c) const {
    DenseVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline DenseMatrix operator*(double c, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

inline DenseVector multiply(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("multiply: A.cols != x.len");
  DenseVector out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = dot(a.row(r), x);
  return out;
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("multiply: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

// Max absolute row sum.
inline double norm_inf(const DenseMatrix& a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (double v : a.row(r)) s += std::fabs(v);
    best = std::max(best, s);
  }
  return best;
}

// ---------------------------------------------------------------------------
// IndexSet: sorted, duplicate-free column indices.

class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<std::size_t> idx) : idx_(idx) { normalize(); }
  explicit IndexSet(std::vector<std::size_t> idx) : idx_(std::move(idx)) { normalize(); }

  std::size_t size() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  bool contains(std::size_t i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
  }
  std::size_t operator[](std::size_t pos) const { return idx_[pos]; }

  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }

  // Position of `i` within the ascending order, or size() if absent.
  std::size_t position(std::size_t i) const {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), i);
    if (it == idx_.end() || *it != i) return idx_.size();
    return static_cast<std::size_t>(it - idx_.begin());
  }

  IndexSet united(const IndexSet& other) const {
    std::vector<std::size_t> out;
    out.reserve(idx_.size() + other.idx_.size());
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(out));
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  IndexSet minus(const IndexSet& other) const {
    std::vector<std::size_t> out;
    std::set_difference(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                        std::back_inserter(out));
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  bool operator==(const IndexSet&) const = default;

 private:
  void normalize() {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  }

  std::vector<std::size_t> idx_;
};

inline std::string to_string(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

// Columns of `a` indexed by `cols`, in ascending index order.
inline DenseMatrix select_columns(const DenseMatrix& a, const IndexSet& cols) {
  DenseMatrix out(a.rows(), cols.size());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = a(r, cols[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Householder QR least squares (no pivoting).

namespace detail {

// Column-major working copy; factorized in place.
struct HouseholderQr {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a;     // column-major m x n; R in the upper triangle
  std::vector<double> beta;  // reflector scalings
  std::vector<double> diag;  // diagonal of R

  double& at(std::size_t r, std::size_t c) { return a[c * m + r]; }
  double at(std::size_t r, std::size_t c) const { return a[c * m + r]; }

  void factor() {
    beta.assign(n, 0.0);
    diag.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double* col = &a[k * m];
      const double alpha_norm = norm2(std::span<const double>(col + k, m - k));
      if (alpha_norm == 0.0) {
        diag[k] = 0.0;
        beta[k] = 0.0;
        continue;
      }
      const double sign = col[k] >= 0.0 ? 1.0 : -1.0;
      const double rkk = -sign * alpha_norm;
      // v = x - rkk e1, stored in place with v[0] = x0 - rkk.
      col[k] -= rkk;
      const double vtv = [&] {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += col[i] * col[i];
        return s;
      }();
      beta[k] = 2.0 / vtv;
      for (std::size_t j = k + 1; j < n; ++j) {
        double* cj = &a[j * m];
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += col[i] * cj[i];
        s *= beta[k];
        for (std::size_t i = k; i < m; ++i) cj[i] -= s * col[i];
      }
      diag[k] = rkk;
    }
  }

  // y <- Q^T y
  void apply_qt(std::vector<double>& y) const {
    for (std::size_t k = 0; k < n; ++k) {
      if (beta[k] == 0.0) continue;
      const double* col = &a[k * m];
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += col[i] * y[i];
      s *= beta[k];
      for (std::size_t i = k; i < m; ++i) y[i] -= s * col[i];
    }
  }
};

}  // namespace detail

inline constexpr double kRankTolerance = 1e-12;

namespace detail {

inline DenseVector solve_factored(HouseholderQr& qr, const DenseVector& y) {
  qr.factor();

  double dmax = 0.0;
  for (double d : qr.diag) dmax = std::max(dmax, std::fabs(d));
  if (dmax == 0.0) throw RankDeficient("least_squares: zero matrix");
  for (double d : qr.diag)
    if (std::fabs(d) < kRankTolerance * dmax)
      throw RankDeficient("least_squares: diagonal of R below relative threshold");

  std::vector<double> qty(y.begin(), y.end());
  qr.apply_qt(qty);

  DenseVector w(qr.n);
  for (std::size_t i = qr.n; i-- > 0;) {
    double s = qty[i];
    for (std::size_t j = i + 1; j < qr.n; ++j) s -= qr.at(i, j) * w[j];
    w[i] = s / qr.diag[i];
  }
  return w;
}

}  // namespace detail

// Solves min ||y - A w||_2. Throws RankDeficient when A has more columns than
// rows or a diagonal entry of R falls below kRankTolerance * max |R_ii|.
inline DenseVector least_squares(const DenseMatrix& a, const DenseVector& y) {
  if (a.rows() != y.size()) throw DimensionMismatch("least_squares: A.rows != y.len");
  if (a.cols() == 0) throw DimensionMismatch("least_squares: A has no columns");
  if (a.cols() > a.rows())
    throw RankDeficient("least_squares: more columns than rows");

  detail::HouseholderQr qr;
  qr.m = a.rows();
  qr.n = a.cols();
  qr.a.resize(qr.m * qr.n);
  for (std::size_t r = 0; r < qr.m; ++r)
    for (std::size_t c = 0; c < qr.n; ++c) qr.at(r, c) = a(r, c);
  return detail::solve_factored(qr, y);
}

// least_squares(select_columns(a, cols), y) without the intermediate copy.
inline DenseVector least_squares(const DenseMatrix& a, const IndexSet& cols,
                                 const DenseVector& y) {
  if (a.rows() != y.size()) throw DimensionMismatch("least_squares: A.rows != y.len");
  if (cols.empty()) throw DimensionMismatch("least_squares: empty column set");
  if (cols.size() > a.rows())
    throw RankDeficient("least_squares: more columns than rows");

  detail::HouseholderQr qr;
  qr.m = a.rows();
  qr.n = cols.size();
  qr.a.resize(qr.m * qr.n);
  for (std::size_t r = 0; r < qr.m; ++r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < qr.n; ++c) qr.at(r, c) = row[cols[c]];
  }
  return detail::solve_factored(qr, y);
}

// y - A_cols w
inline DenseVector residual(const DenseMatrix& a, const IndexSet& cols,
                            std::span<const double> w, const DenseVector& y) {
  DenseVector r = y;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto row = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) s += row[cols[j]] * w[j];
    r[i] -= s;
  }
  return r;
}

// Phi^T r (the conjugate transpose of a real dictionary).
inline DenseVector correlate(const DenseMatrix& phi, const DenseVector& r) {
  if (phi.rows() != r.size()) throw DimensionMismatch("correlate: Phi.rows != r.len");
  DenseVector out(phi.cols());
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    const double ri = r[i];
    if (ri == 0.0) continue;
    auto row = phi.row(i);
    for (std::size_t j = 0; j < phi.cols(); ++j) out[j] += row[j] * ri;
  }
  return out;
}

// The k indices outside `exclude` with largest |v_i|; equal magnitudes go to
// the lower index first.
inline IndexSet top_k_by_magnitude(const DenseVector& v, std::size_t k,
                                   const IndexSet& exclude = {}) {
  std::vector<std::size_t> candidates;
  candidates.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!exclude.contains(i)) candidates.push_back(i);
  if (k > candidates.size())
    throw InsufficientCandidates("top_k_by_magnitude: k exceeds available candidates");
  auto larger = [&](std::size_t a, std::size_t b) {
    const double fa = std::fabs(v[a]);
    const double fb = std::fabs(v[b]);
    return fa != fb ? fa > fb : a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), larger);
  candidates.resize(k);
  return IndexSet(std::move(candidates));
}

// The k indices with smallest |v_i|. Ties use the same order as top_k_by_magnitude
// (lower index ranks larger), so the higher index is dropped first.
inline IndexSet bottom_k_by_magnitude(const DenseVector& v, std::size_t k) {
  if (k > v.size())
    throw InsufficientCandidates("bottom_k_by_magnitude: k exceeds vector length");
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto smaller = [&](std::size_t a, std::size_t b) {
    const double fa = std::fabs(v[a]);
    const double fb = std::fabs(v[b]);
    return fa != fb ? fa < fb : a > b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    smaller);
  idx.resize(k);
  return IndexSet(std::move(idx));
}

// ---------------------------------------------------------------------------
// Rng

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator (SplitMix64). Output i is
/// mix64(seed + (i + 1) * 0x9e3779b97f4a7c15), so a stream depends only on
/// its seed and position. Uniform doubles take the top 53 bits. Normals use
/// the Marsaglia polar method: draw u, v uniform on (-1, 1) until
/// 0 < s = u^2 + v^2 < 1, then return u * sqrt(-2 ln s / s) and cache
/// v * sqrt(-2 ln s / s) for the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection sampled so there is no modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  bool sign() noexcept { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline DenseVector sample_standard_normal(Rng& rng, std::size_t n) {
  DenseVector out(n);
  for (double& v : out) v = rng.normal();
  return out;
}

}  // namespace fbp
