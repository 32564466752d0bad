#pragma once

// Greedy sparse recovery: forward-backward pursuit (FBP), orthogonal matching
// pursuit (OMP), subspace pursuit (SP), and an exhaustive l0 search for tiny
// instances.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "fbp/linalg.hpp"
#include "fbp/signals.hpp"

namespace fbp {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RecoveryStatus { Converged, SupportCapReached, ResidualStalled, IllPosedProjection };

inline std::string_view to_string(RecoveryStatus s) {
  switch (s) {
    case RecoveryStatus::Converged: return "converged";
    case RecoveryStatus::SupportCapReached: return "support_cap_reached";
    case RecoveryStatus::ResidualStalled: return "residual_stalled";
    case RecoveryStatus::IllPosedProjection: return "ill_posed_projection";
  }
  return "?";
}

struct FbpConfig {
  std::size_t alpha = 2;  // forward step size
  std::size_t beta = 1;   // backward step size
  double epsilon = 1e-6;  // stop once |r| <= epsilon |y|
  std::size_t k_max = 1;  // stop once |support| >= k_max
  bool skip_backward_projection = false;
  bool record_trace = false;

  /// alpha = round(0.2 M) (at least 2), beta = alpha - 1, epsilon = 1e-6, k_max = M.
  static FbpConfig defaults_for(std::size_t m) {
    FbpConfig c;
    c.alpha = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(m))));
    c.beta = c.alpha - 1;
    c.epsilon = 1e-6;
    c.k_max = std::max(m, c.alpha - c.beta);
    return c;
  }

  void validate() const {
    if (alpha <= 1) throw InvalidConfig("fbp: alpha must exceed 1");
    if (beta < 1 || beta >= alpha) throw InvalidConfig("fbp: need 1 <= beta < alpha");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidConfig("fbp: need 0 <= epsilon < 1");
    if (k_max < alpha - beta) throw InvalidConfig("fbp: k_max must be at least alpha - beta");
  }
};

struct OmpConfig {
  double epsilon = 1e-6;
  std::size_t k_max = 1;
  bool record_trace = false;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidConfig("omp: need 0 <= epsilon < 1");
    if (k_max < 1) throw InvalidConfig("omp: k_max must be at least 1");
  }
};

struct SpConfig {
  std::size_t k = 1;
  std::size_t max_iter = 100;
  bool record_trace = false;

  void validate() const {
    if (k < 1) throw InvalidConfig("sp: k must be at least 1");
    if (max_iter < 1) throw InvalidConfig("sp: max_iter must be at least 1");
  }
};

struct L0Config {
  std::size_t k_max = 4;
};

using AlgorithmConfig = std::variant<FbpConfig, OmpConfig, SpConfig, L0Config>;

inline std::string_view algorithm_name(const AlgorithmConfig& cfg) {
  static constexpr std::string_view names[] = {"fbp", "omp", "sp", "l0"};
  return names[cfg.index()];
}

/// One completed iteration. For OMP the expanded and final supports coincide.
struct IterationTrace {
  IndexSet expanded_support;
  double expanded_residual_norm = 0.0;  // |y - Phi_expanded w| before pruning
  IndexSet support;
  double residual_norm = 0.0;
};

struct RecoveryResult {
  SparseSignal estimate;
  std::size_t iterations = 0;
  double final_residual_norm = 0.0;
  RecoveryStatus status = RecoveryStatus::Converged;
  std::vector<IterationTrace> trace;
  std::vector<std::string> warnings;
};

namespace detail {

inline SparseSignal make_estimate(std::size_t n, const IndexSet& support,
                                  const DenseVector& coeffs) {
  SparseSignal x = SparseSignal::zeros(n);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    idx.push_back(support[i]);
    x.values.push_back(coeffs[i]);
  }
  x.support = IndexSet(std::move(idx));
  return x;
}

// Indices of `support` at the given positions.
inline IndexSet at_positions(const IndexSet& support, const IndexSet& positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(support[p]);
  return IndexSet(std::move(out));
}

// Coefficients of `from_support` restricted to the members of `to_support`.
inline DenseVector restrict_coeffs(const IndexSet& from_support, const DenseVector& coeffs,
                                   const IndexSet& to_support) {
  DenseVector out(to_support.size());
  for (std::size_t i = 0; i < to_support.size(); ++i)
    out[i] = coeffs[from_support.position(to_support[i])];
  return out;
}

// Running state shared by the iterative algorithms.
struct PursuitState {
  IndexSet support;
  DenseVector coeffs;
  DenseVector residual;
  double residual_norm = 0.0;
};

inline RecoveryResult finish(std::size_t n, const PursuitState& s, std::size_t iterations,
                             RecoveryStatus status, RecoveryResult&& partial) {
  partial.estimate = make_estimate(n, s.support, s.coeffs);
  partial.iterations = iterations;
  partial.final_residual_norm = s.residual_norm;
  partial.status = status;
  return std::move(partial);
}

}  // namespace detail

/// Forward-backward pursuit. Each iteration adds the alpha unselected atoms
/// most correlated with the residual, projects y on the expanded support,
/// drops the beta atoms with the smallest projection coefficients, and
/// re-projects on what remains. Stops when |r| <= epsilon |y| or the support
/// reaches k_max. If the expanded support would exceed the number of rows or
/// the projection is rank deficient, the previous iterate is returned with
/// IllPosedProjection.
inline RecoveryResult fbp(const DenseMatrix& phi, const DenseVector& y, const FbpConfig& cfg) {
  if (phi.rows() != y.size()) throw DimensionMismatch("fbp: Phi.rows != y.len");
  cfg.validate();

  RecoveryResult out;
  if (cfg.alpha > phi.rows())
    out.warnings.push_back("fbp: alpha exceeds the number of observations");

  const std::size_t m = phi.rows();
  const std::size_t n = phi.cols();
  const double ynorm = norm2(y.span());
  const double threshold = cfg.epsilon * ynorm;

  detail::PursuitState s{{}, {}, y, ynorm};
  if (s.residual_norm <= threshold)
    return detail::finish(n, s, 0, RecoveryStatus::Converged, std::move(out));

  for (std::size_t iter = 1;; ++iter) {
    const std::size_t expanded = s.support.size() + cfg.alpha;
    if (expanded > m || expanded > n)
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));

    const DenseVector corr = correlate(phi, s.residual);
    const IndexSet added = top_k_by_magnitude(corr, cfg.alpha, s.support);
    const IndexSet expanded_support = s.support.united(added);

    DenseVector w;
    try {
      w = least_squares(phi, expanded_support, y);
    } catch (const RankDeficient&) {
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));
    }

    const IndexSet dropped =
        detail::at_positions(expanded_support, bottom_k_by_magnitude(w, cfg.beta));
    const IndexSet pruned = expanded_support.minus(dropped);

    DenseVector coeffs;
    if (cfg.skip_backward_projection) {
      coeffs = detail::restrict_coeffs(expanded_support, w, pruned);
    } else {
      try {
        coeffs = least_squares(phi, pruned, y);
      } catch (const RankDeficient&) {
        return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));
      }
    }

    s.residual = residual(phi, pruned, coeffs.span(), y);
    s.residual_norm = norm2(s.residual.span());
    s.support = pruned;
    s.coeffs = std::move(coeffs);

    if (cfg.record_trace) {
      const DenseVector r_exp = residual(phi, expanded_support, w.span(), y);
      out.trace.push_back({expanded_support, norm2(r_exp.span()), s.support, s.residual_norm});
    }

    if (s.residual_norm <= threshold)
      return detail::finish(n, s, iter, RecoveryStatus::Converged, std::move(out));
    if (s.support.size() >= cfg.k_max)
      return detail::finish(n, s, iter, RecoveryStatus::SupportCapReached, std::move(out));
  }
}

/// Orthogonal matching pursuit with the same relative-residual stopping rule.
inline RecoveryResult omp(const DenseMatrix& phi, const DenseVector& y, const OmpConfig& cfg) {
  if (phi.rows() != y.size()) throw DimensionMismatch("omp: Phi.rows != y.len");
  cfg.validate();

  RecoveryResult out;
  const std::size_t m = phi.rows();
  const std::size_t n = phi.cols();
  const double ynorm = norm2(y.span());
  const double threshold = cfg.epsilon * ynorm;

  detail::PursuitState s{{}, {}, y, ynorm};
  if (s.residual_norm <= threshold)
    return detail::finish(n, s, 0, RecoveryStatus::Converged, std::move(out));

  for (std::size_t iter = 1;; ++iter) {
    if (s.support.size() + 1 > m || s.support.size() + 1 > n)
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));

    const DenseVector corr = correlate(phi, s.residual);
    const IndexSet next = s.support.united(top_k_by_magnitude(corr, 1, s.support));

    DenseVector coeffs;
    try {
      coeffs = least_squares(phi, next, y);
    } catch (const RankDeficient&) {
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));
    }

    s.residual = residual(phi, next, coeffs.span(), y);
    s.residual_norm = norm2(s.residual.span());
    s.support = next;
    s.coeffs = std::move(coeffs);
    if (cfg.record_trace)
      out.trace.push_back({s.support, s.residual_norm, s.support, s.residual_norm});

    if (s.residual_norm <= threshold)
      return detail::finish(n, s, iter, RecoveryStatus::Converged, std::move(out));
    if (s.support.size() >= cfg.k_max)
      return detail::finish(n, s, iter, RecoveryStatus::SupportCapReached, std::move(out));
  }
}

/// Subspace pursuit with a fixed support size k, starting from the empty
/// support. Iteration stops when the residual no longer decreases (the
/// previous iterate is returned, status ResidualStalled), when it falls to
/// 1e-12 |y| (Converged), or after max_iter iterations (ResidualStalled).
inline RecoveryResult sp(const DenseMatrix& phi, const DenseVector& y, const SpConfig& cfg) {
  if (phi.rows() != y.size()) throw DimensionMismatch("sp: Phi.rows != y.len");
  cfg.validate();

  RecoveryResult out;
  const std::size_t m = phi.rows();
  const std::size_t n = phi.cols();
  if (2 * cfg.k > m) out.warnings.push_back("sp: 2k exceeds the number of observations");

  const double ynorm = norm2(y.span());
  const double threshold = 1e-12 * ynorm;

  detail::PursuitState s{{}, {}, y, ynorm};
  if (s.residual_norm <= threshold)
    return detail::finish(n, s, 0, RecoveryStatus::Converged, std::move(out));

  for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
    const std::size_t add = std::min(cfg.k, n - s.support.size());
    const std::size_t expanded = s.support.size() + add;
    if (expanded > m)
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));

    const DenseVector corr = correlate(phi, s.residual);
    const IndexSet expanded_support = s.support.united(top_k_by_magnitude(corr, add, s.support));

    DenseVector w;
    DenseVector coeffs;
    IndexSet kept;
    try {
      w = least_squares(phi, expanded_support, y);
      const std::size_t keep = std::min(cfg.k, expanded_support.size());
      kept = detail::at_positions(expanded_support, top_k_by_magnitude(w, keep));
      coeffs = least_squares(phi, kept, y);
    } catch (const RankDeficient&) {
      return detail::finish(n, s, iter - 1, RecoveryStatus::IllPosedProjection, std::move(out));
    }

    DenseVector r = residual(phi, kept, coeffs.span(), y);
    const double rnorm = norm2(r.span());
    if (iter > 1 && rnorm >= s.residual_norm)
      return detail::finish(n, s, iter - 1, RecoveryStatus::ResidualStalled, std::move(out));

    s.support = std::move(kept);
    s.coeffs = std::move(coeffs);
    s.residual = std::move(r);
    s.residual_norm = rnorm;
    if (cfg.record_trace) {
      const DenseVector r_exp = residual(phi, expanded_support, w.span(), y);
      out.trace.push_back({expanded_support, norm2(r_exp.span()), s.support, s.residual_norm});
    }

    if (s.residual_norm <= threshold)
      return detail::finish(n, s, iter, RecoveryStatus::Converged, std::move(out));
  }
  return detail::finish(n, s, cfg.max_iter, RecoveryStatus::ResidualStalled, std::move(out));
}

inline constexpr std::size_t kL0MaxColumns = 24;
inline constexpr std::size_t kL0MaxSparsity = 4;

/// Exhaustive search over supports of size 0..k_max in lexicographic order.
/// Returns the first (smallest, then lexicographically least) support whose
/// least-squares residual is at most 1e-8 |y|. When none qualifies, the
/// support with the smallest residual is returned with ResidualStalled.
inline RecoveryResult l0_oracle(const DenseMatrix& phi, const DenseVector& y, std::size_t k_max) {
  if (phi.rows() != y.size()) throw DimensionMismatch("l0_oracle: Phi.rows != y.len");
  if (phi.cols() > kL0MaxColumns || k_max > kL0MaxSparsity)
    throw InstanceTooLarge("l0_oracle: requires at most 24 columns and k_max <= 4");

  const std::size_t n = phi.cols();
  const double ynorm = norm2(y.span());
  const double threshold = 1e-8 * ynorm;

  detail::PursuitState best{{}, {}, y, ynorm};
  RecoveryResult out;
  if (ynorm <= threshold) return detail::finish(n, best, 0, RecoveryStatus::Converged, std::move(out));

  std::size_t evaluated = 0;
  const std::size_t kmax = std::min({k_max, n, phi.rows()});
  for (std::size_t size = 1; size <= kmax; ++size) {
    std::vector<std::size_t> comb(size);
    for (std::size_t i = 0; i < size; ++i) comb[i] = i;
    while (true) {
      const IndexSet cols(comb);
      ++evaluated;
      try {
        DenseVector w = least_squares(phi, cols, y);
        DenseVector r = residual(phi, cols, w.span(), y);
        const double rn = norm2(r.span());
        if (rn <= threshold) {
          detail::PursuitState hit{cols, std::move(w), std::move(r), rn};
          return detail::finish(n, hit, evaluated, RecoveryStatus::Converged, std::move(out));
        }
        if (rn < best.residual_norm) best = {cols, std::move(w), std::move(r), rn};
      } catch (const RankDeficient&) {
      }
      // Next combination in lexicographic order.
      std::size_t i = size;
      while (i > 0 && comb[i - 1] == n - size + (i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return detail::finish(n, best, evaluated, RecoveryStatus::ResidualStalled, std::move(out));
}

inline RecoveryResult recover(const DenseMatrix& phi, const DenseVector& y,
                              const AlgorithmConfig& cfg) {
  return std::visit(
      [&](const auto& c) -> RecoveryResult {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FbpConfig>) return fbp(phi, y, c);
        else if constexpr (std::is_same_v<T, OmpConfig>) return omp(phi, y, c);
        else if constexpr (std::is_same_v<T, SpConfig>) return sp(phi, y, c);
        else return l0_oracle(phi, y, c.k_max);
      },
      cfg);
}

}  // namespace fbp
