#pragma once

// Monte-Carlo harness: seeded trials, recovery-rate / ANMSE / runtime sweeps,
// phase-transition grids with logistic 50% crossings, noisy distortion.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fbp/linalg.hpp"
#include "fbp/pursuit.hpp"
#include "fbp/signals.hpp"

namespace fbp {

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-trial seed: three chained SplitMix64 finalizer rounds over the master
/// seed, the group id (sparsity level or phase-grid cell) and the trial index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t group,
                                    std::uint64_t trial) noexcept {
  std::uint64_t h = mix64(master + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (group * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
  h = mix64(h ^ (trial * 0x8cb92ba72f3d8dd7ULL + 0x632be59bd9b4e019ULL));
  return h;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are
/// claimed from a shared counter, so results must be keyed by i.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Trials

struct TrialSpec {
  std::size_t n = 256;
  std::size_t m = 100;
  std::size_t k = 10;
  Ensemble ensemble = Ensemble::Gaussian;
  std::optional<double> snr_db;
  AlgorithmConfig algorithm = FbpConfig{};
  std::uint64_t master_seed = 0;
  std::uint64_t group = 0;
  std::size_t trial_index = 0;

  std::uint64_t seed() const noexcept { return derive_seed(master_seed, group, trial_index); }
};

struct TrialRecord {
  TrialSpec spec;
  bool exact = false;
  double nmse = 0.0;
  double runtime_seconds = 0.0;
  RecoveryStatus status = RecoveryStatus::Converged;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  double noise_norm = 0.0;
  IndexSet true_support;
  IndexSet recovered_support;
};

/// |x - xhat|_2 <= 1e-2 |x|_2; a zero x is recovered only by a zero xhat.
inline bool exact_recovery(const SparseSignal& x, const SparseSignal& xhat) {
  if (x.length != xhat.length) throw DimensionMismatch("exact_recovery: length mismatch");
  const double err = norm2((x.dense() - xhat.dense()).span());
  const double xn = x.norm();
  if (xn == 0.0) return xhat.norm() == 0.0;
  return err <= 1e-2 * xn;
}

/// |x - xhat|^2 / |x|^2, or |xhat|^2 when x is zero.
inline double normalized_squared_error(const SparseSignal& x, const SparseSignal& xhat) {
  if (x.length != xhat.length) throw DimensionMismatch("nmse: length mismatch");
  const double err = norm2((x.dense() - xhat.dense()).span());
  const double xn = x.norm();
  if (xn == 0.0) return err * err;
  return (err * err) / (xn * xn);
}

/// The problem instance a trial spec expands to.
struct TrialInstance {
  SparseSignal x;
  DenseMatrix phi;
  Observation obs;
};

/// Draws x, then Phi, then (if snr_db is set and y is nonzero) the noise,
/// all from one Rng seeded with spec.seed().
inline TrialInstance make_instance(const TrialSpec& spec) {
  Rng rng(spec.seed());
  TrialInstance inst;
  inst.x = sample_sparse_signal(spec.n, spec.k, spec.ensemble, rng);
  inst.phi = sample_observation_matrix(spec.m, spec.n, rng);
  inst.obs = observe(inst.phi, inst.x);
  if (spec.snr_db && norm2(inst.obs.y.span()) > 0.0)
    inst.obs = add_noise(inst.obs.y, *spec.snr_db, rng);
  return inst;
}

inline TrialRecord run_trial(const TrialSpec& spec) {
  const TrialInstance inst = make_instance(spec);

  const auto t0 = std::chrono::steady_clock::now();
  RecoveryResult res = recover(inst.phi, inst.obs.y, spec.algorithm);
  const auto t1 = std::chrono::steady_clock::now();

  TrialRecord rec;
  rec.spec = spec;
  rec.exact = exact_recovery(inst.x, res.estimate);
  rec.nmse = normalized_squared_error(inst.x, res.estimate);
  rec.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
  rec.status = res.status;
  rec.iterations = res.iterations;
  rec.residual_norm = res.final_residual_norm;
  rec.noise_norm = inst.obs.noise_power ? std::sqrt(*inst.obs.noise_power) : 0.0;
  rec.true_support = inst.x.support;
  rec.recovered_support = res.estimate.support;
  return rec;
}

// ---------------------------------------------------------------------------
// Aggregates

inline double anmse(std::span<const TrialRecord> records) {
  if (records.empty()) throw EmptyInput("anmse: no records");
  double s = 0.0;
  for (const auto& r : records) s += r.nmse;
  return s / static_cast<double>(records.size());
}

/// 10 log10(anmse); -infinity when anmse is exactly zero.
inline double distortion_db(std::span<const TrialRecord> records) {
  const double a = anmse(records);
  if (a == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(a);
}

/// epsilon = 10^(-snr/20). With the noise scaled to the realized SNR,
/// epsilon |y_clean| is the noise norm; callers apply it to the noisy y.
inline double noisy_epsilon(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

struct TrialContext {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::optional<double> snr_db;
};

/// An algorithm whose parameters may depend on the problem size (alpha = 0.2M,
/// SP given the true sparsity, epsilon matched to the SNR).
struct AlgorithmSpec {
  std::string label;
  std::function<AlgorithmConfig(const TrialContext&)> make;
};

inline AlgorithmSpec fixed_algorithm(std::string label, AlgorithmConfig cfg) {
  return {std::move(label), [cfg](const TrialContext&) { return cfg; }};
}

struct SweepPlan {
  std::size_t n = 256;
  std::size_t m = 100;
  Ensemble ensemble = Ensemble::Gaussian;
  std::vector<std::size_t> k_values;
  std::vector<std::optional<double>> snr_values{std::nullopt};
  AlgorithmSpec algorithm;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

struct SweepPoint {
  std::size_t k = 0;
  std::optional<double> snr_db;
  std::size_t trial_count = 0;
  std::size_t exact_count = 0;
  double exact_rate = 0.0;
  double anmse = 0.0;
  double distortion_db = 0.0;
  double mean_runtime = 0.0;
  double mean_iterations = 0.0;
};

struct SweepSummary {
  std::string algorithm;
  std::vector<SweepPoint> points;
};

struct SweepResult {
  std::vector<TrialRecord> records;  // point-major, trial-minor
  SweepSummary summary;
};

inline SweepPoint summarize_point(std::span<const TrialRecord> recs) {
  SweepPoint p;
  if (recs.empty()) return p;
  p.k = recs.front().spec.k;
  p.snr_db = recs.front().spec.snr_db;
  p.trial_count = recs.size();
  double rt = 0.0;
  double it = 0.0;
  for (const auto& r : recs) {
    p.exact_count += r.exact ? 1 : 0;
    rt += r.runtime_seconds;
    it += static_cast<double>(r.iterations);
  }
  const double cnt = static_cast<double>(recs.size());
  p.exact_rate = static_cast<double>(p.exact_count) / cnt;
  p.anmse = anmse(recs);
  p.distortion_db = distortion_db(recs);
  p.mean_runtime = rt / cnt;
  p.mean_iterations = it / cnt;
  return p;
}

/// For every (k, snr) point runs `trials` trials with seeds
/// derive_seed(master_seed, k, trial_index). The seed does not depend on the
/// SNR or the algorithm, so different SNRs and algorithms see the same x and
/// Phi. Failed recoveries are recorded, never thrown.
inline SweepResult run_sweep(const SweepPlan& plan) {
  if (plan.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  if (!plan.algorithm.make) throw std::invalid_argument("run_sweep: no algorithm");

  struct Point {
    std::size_t k;
    std::optional<double> snr;
  };
  std::vector<Point> points;
  for (std::size_t k : plan.k_values)
    for (const auto& snr : plan.snr_values) points.push_back({k, snr});

  SweepResult out;
  out.records.resize(points.size() * plan.trials);
  parallel_for(out.records.size(), plan.threads, [&](std::size_t i) {
    const Point& pt = points[i / plan.trials];
    TrialSpec spec;
    spec.n = plan.n;
    spec.m = plan.m;
    spec.k = pt.k;
    spec.ensemble = plan.ensemble;
    spec.snr_db = pt.snr;
    spec.algorithm = plan.algorithm.make({plan.n, plan.m, pt.k, pt.snr});
    spec.master_seed = plan.master_seed;
    spec.group = pt.k;
    spec.trial_index = i % plan.trials;
    out.records[i] = run_trial(spec);
  });

  out.summary.algorithm = plan.algorithm.label;
  for (std::size_t p = 0; p < points.size(); ++p)
    out.summary.points.push_back(summarize_point(
        std::span<const TrialRecord>(out.records).subspan(p * plan.trials, plan.trials)));
  return out;
}

// ---------------------------------------------------------------------------
// Logistic fit

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::optional<double> rho50;  // -intercept / slope, present only when converged
  bool converged = false;
  bool degenerate = false;           // complete separation
  std::optional<double> boundary;    // separation point reported instead of rho50
  std::size_t iterations = 0;

  /// rho50 when the fit converged, otherwise the separation boundary.
  std::optional<double> crossing() const { return rho50 ? rho50 : boundary; }
};

/// Maximum-likelihood logistic regression of the success probability on rho
/// from per-point binomial counts, by iteratively reweighted least squares
/// (Newton on the log-likelihood, at most 100 steps, stop when the largest
/// parameter change drops below 1e-10).
///
/// Completely separated data has no finite MLE. If every point is a full
/// success the boundary is the largest rho; if every point is a full failure
/// it is the smallest rho; if full successes and full failures are split by
/// rho with no partial point, it is the midpoint of the gap.
inline LogisticFit fit_logistic_50(std::span<const double> rho,
                                   std::span<const std::size_t> successes,
                                   std::size_t trials) {
  if (rho.size() != successes.size())
    throw DimensionMismatch("fit_logistic_50: rho and successes differ in length");
  if (trials == 0) throw std::invalid_argument("fit_logistic_50: trials must be positive");
  for (std::size_t s : successes)
    if (s > trials) throw std::invalid_argument("fit_logistic_50: successes exceed trials");
  {
    std::vector<double> distinct(rho.begin(), rho.end());
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2)
      throw std::invalid_argument("fit_logistic_50: need at least two distinct rho values");
  }

  LogisticFit fit;

  // Separation check.
  bool any_partial = false;
  double max_full = -std::numeric_limits<double>::infinity();
  double min_full = std::numeric_limits<double>::infinity();
  double max_zero = -std::numeric_limits<double>::infinity();
  double min_zero = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (successes[i] == trials) {
      max_full = std::max(max_full, rho[i]);
      min_full = std::min(min_full, rho[i]);
    } else if (successes[i] == 0) {
      max_zero = std::max(max_zero, rho[i]);
      min_zero = std::min(min_zero, rho[i]);
    } else {
      any_partial = true;
    }
  }
  if (!any_partial) {
    const bool no_zero = std::isinf(min_zero);
    const bool no_full = std::isinf(min_full);
    if (no_zero) {
      fit.degenerate = true;
      fit.boundary = max_full;
      return fit;
    }
    if (no_full) {
      fit.degenerate = true;
      fit.boundary = min_zero;
      return fit;
    }
    if (max_full < min_zero) {
      fit.degenerate = true;
      fit.boundary = 0.5 * (max_full + min_zero);
      return fit;
    }
    if (max_zero < min_full) {
      fit.degenerate = true;
      fit.boundary = 0.5 * (max_zero + min_full);
      return fit;
    }
  }

  const double nt = static_cast<double>(trials);
  double b0 = 0.0;
  double b1 = 0.0;
  for (std::size_t iter = 1; iter <= 100; ++iter) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double eta = b0 + b1 * rho[i];
      const double p = 1.0 / (1.0 + std::exp(-eta));
      const double resid = static_cast<double>(successes[i]) - nt * p;
      const double w = nt * p * (1.0 - p);
      g0 += resid;
      g1 += resid * rho[i];
      h00 += w;
      h01 += w * rho[i];
      h11 += w * rho[i] * rho[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) break;
    const double d0 = (h11 * g0 - h01 * g1) / det;
    const double d1 = (h00 * g1 - h01 * g0) / det;
    b0 += d0;
    b1 += d1;
    fit.iterations = iter;
    if (!std::isfinite(b0) || !std::isfinite(b1)) break;
    if (std::max(std::fabs(d0), std::fabs(d1)) < 1e-10) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = b0;
  fit.slope = b1;
  if (fit.converged && b1 != 0.0) fit.rho50 = -b0 / b1;
  else fit.converged = false;
  return fit;
}

// ---------------------------------------------------------------------------
// Phase transitions

inline std::vector<double> default_rho_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 20; ++i) g.push_back(0.05 * i);
  return g;
}

struct PhaseCell {
  std::size_t m = 0;
  std::size_t k = 0;
  std::optional<std::size_t> successes;  // absent when K > M
};

struct PhaseCurve {
  std::string algorithm;
  std::vector<std::vector<PhaseCell>> cells;  // [lambda][rho]
  std::vector<LogisticFit> fits;              // per lambda
  std::vector<std::optional<double>> rho50;   // per lambda, clamped to (0, 1]
};

struct PhaseGrid {
  std::size_t n = 0;
  Ensemble ensemble = Ensemble::Gaussian;
  std::vector<double> lambda_grid;
  std::vector<double> rho_grid;
  std::size_t trials_per_cell = 0;
  std::vector<PhaseCurve> curves;  // one per algorithm
};

struct PhasePlan {
  std::size_t n = 250;
  Ensemble ensemble = Ensemble::Gaussian;
  std::vector<double> lambda_grid;
  std::vector<double> rho_grid = default_rho_grid();
  std::size_t trials = 200;
  std::vector<AlgorithmSpec> algorithms;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

/// Cell (i, j) uses M = round(lambda_i N), K = max(1, round(rho_j M)) and the
/// seed group i * 65536 + j, shared by all algorithms.
inline PhaseGrid phase_transition(const PhasePlan& plan) {
  if (plan.n < 10) throw std::invalid_argument("phase_transition: n must be at least 10");
  if (plan.lambda_grid.empty() || plan.rho_grid.empty())
    throw std::invalid_argument("phase_transition: empty grid");
  if (plan.trials < 1) throw std::invalid_argument("phase_transition: trials must be >= 1");

  PhaseGrid grid;
  grid.n = plan.n;
  grid.ensemble = plan.ensemble;
  grid.lambda_grid = plan.lambda_grid;
  grid.rho_grid = plan.rho_grid;
  grid.trials_per_cell = plan.trials;

  const std::size_t nl = plan.lambda_grid.size();
  const std::size_t nr = plan.rho_grid.size();
  const std::size_t na = plan.algorithms.size();

  std::vector<std::size_t> ms(nl);
  std::vector<std::vector<std::size_t>> ks(nl, std::vector<std::size_t>(nr));
  for (std::size_t i = 0; i < nl; ++i) {
    ms[i] = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(plan.lambda_grid[i] * static_cast<double>(plan.n))));
    for (std::size_t j = 0; j < nr; ++j)
      ks[i][j] = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(plan.rho_grid[j] * static_cast<double>(ms[i]))));
  }

  // outcome[a][i][j][t]
  const std::size_t per_alg = nl * nr * plan.trials;
  std::vector<char> outcome(na * per_alg, 0);
  parallel_for(na * per_alg, plan.threads, [&](std::size_t idx) {
    const std::size_t a = idx / per_alg;
    const std::size_t rem = idx % per_alg;
    const std::size_t i = rem / (nr * plan.trials);
    const std::size_t j = (rem / plan.trials) % nr;
    const std::size_t t = rem % plan.trials;
    if (ks[i][j] > ms[i]) return;
    TrialSpec spec;
    spec.n = plan.n;
    spec.m = ms[i];
    spec.k = ks[i][j];
    spec.ensemble = plan.ensemble;
    spec.algorithm = plan.algorithms[a].make({plan.n, ms[i], ks[i][j], std::nullopt});
    spec.master_seed = plan.master_seed;
    spec.group = i * 65536 + j;
    spec.trial_index = t;
    outcome[idx] = run_trial(spec).exact ? 1 : 0;
  });

  for (std::size_t a = 0; a < na; ++a) {
    PhaseCurve curve;
    curve.algorithm = plan.algorithms[a].label;
    for (std::size_t i = 0; i < nl; ++i) {
      std::vector<PhaseCell> row(nr);
      std::vector<double> rhos;
      std::vector<std::size_t> succ;
      for (std::size_t j = 0; j < nr; ++j) {
        row[j].m = ms[i];
        row[j].k = ks[i][j];
        if (ks[i][j] > ms[i]) continue;
        std::size_t s = 0;
        for (std::size_t t = 0; t < plan.trials; ++t)
          s += static_cast<std::size_t>(outcome[a * per_alg + (i * nr + j) * plan.trials + t]);
        row[j].successes = s;
        rhos.push_back(plan.rho_grid[j]);
        succ.push_back(s);
      }
      LogisticFit fit;
      std::optional<double> r50;
      if (rhos.size() >= 2) {
        fit = fit_logistic_50(rhos, succ, plan.trials);
        if (auto c = fit.crossing()) r50 = std::clamp(*c, std::numeric_limits<double>::min(), 1.0);
      }
      curve.cells.push_back(std::move(row));
      curve.fits.push_back(fit);
      curve.rho50.push_back(r50);
    }
    grid.curves.push_back(std::move(curve));
  }
  return grid;
}

}  // namespace fbp
