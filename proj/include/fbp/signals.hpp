#pragma once

// Sparse test signals, Gaussian observation matrices and (noisy) observations.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fbp/linalg.hpp"

namespace fbp {

class ZeroSignal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Ensemble { Gaussian, Uniform, Cars };

inline std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::Gaussian: return "gaussian";
    case Ensemble::Uniform: return "uniform";
    case Ensemble::Cars: return "cars";
  }
  return "?";
}

inline std::optional<Ensemble> parse_ensemble(std::string_view s) {
  if (s == "gaussian") return Ensemble::Gaussian;
  if (s == "uniform") return Ensemble::Uniform;
  if (s == "cars") return Ensemble::Cars;
  return std::nullopt;
}

/// Length-N signal stored as its support and the values on it, aligned with
/// the ascending support order.
struct SparseSignal {
  std::size_t length = 0;
  IndexSet support;
  std::vector<double> values;

  static SparseSignal zeros(std::size_t n) { return SparseSignal{n, {}, {}}; }

  DenseVector dense() const {
    DenseVector out(length);
    for (std::size_t i = 0; i < support.size(); ++i) out[support[i]] = values[i];
    return out;
  }

  double norm() const { return norm2(values); }
};

struct Observation {
  DenseVector y;
  std::optional<double> snr_db;
  std::optional<double> noise_power;
};

inline double draw_nonzero(Ensemble ens, Rng& rng) {
  switch (ens) {
    case Ensemble::Gaussian: {
      double v;
      do v = rng.normal(); while (v == 0.0);
      return v;
    }
    case Ensemble::Uniform: {
      double v;
      do v = rng.uniform(-1.0, 1.0); while (v == 0.0);
      return v;
    }
    case Ensemble::Cars:
      return rng.sign() ? 1.0 : -1.0;
  }
  return 0.0;
}

/// Uniform random k-subset of [0, n) by partial Fisher-Yates, values drawn
/// from the ensemble in ascending support order.
inline SparseSignal sample_sparse_signal(std::size_t n, std::size_t k, Ensemble ens, Rng& rng) {
  if (k > n) throw std::invalid_argument("sample_sparse_signal: k > n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(k);
  SparseSignal x{n, IndexSet(std::move(perm)), {}};
  x.values.reserve(k);
  for (std::size_t i = 0; i < k; ++i) x.values.push_back(draw_nonzero(ens, rng));
  return x;
}

/// m x n matrix of i.i.d. N(0, (1/n)^2) entries, drawn in row-major order.
inline DenseMatrix sample_observation_matrix(std::size_t m, std::size_t n, Rng& rng) {
  if (m == 0 || n == 0) throw std::invalid_argument("sample_observation_matrix: empty shape");
  DenseMatrix phi(m, n);
  const double sd = 1.0 / static_cast<double>(n);
  for (double& v : phi.data()) v = sd * rng.normal();
  return phi;
}

inline Observation observe(const DenseMatrix& phi, const SparseSignal& x) {
  if (phi.cols() != x.length) throw DimensionMismatch("observe: Phi.cols != x.length");
  DenseVector y(phi.rows());
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    auto row = phi.row(r);
    double s = 0.0;
    for (std::size_t j = 0; j < x.support.size(); ++j) s += row[x.support[j]] * x.values[j];
    y[r] = s;
  }
  return Observation{std::move(y), std::nullopt, std::nullopt};
}

/// y + n with n white Gaussian, rescaled so that the realized SNR
/// 10 log10(|y|^2 / |n|^2) equals snr_db exactly.
inline Observation add_noise(const DenseVector& y, double snr_db, Rng& rng) {
  const double ynorm = norm2(y.span());
  if (ynorm == 0.0) throw ZeroSignal("add_noise: observation has zero norm");
  DenseVector n = sample_standard_normal(rng, y.size());
  const double target = ynorm * std::pow(10.0, -snr_db / 20.0);
  const double scale = target / norm2(n.span());
  for (double& v : n) v *= scale;
  Observation obs{y + n, snr_db, std::nullopt};
  const double nn = norm2(n.span());
  obs.noise_power = nn * nn;
  return obs;
}

}  // namespace fbp
