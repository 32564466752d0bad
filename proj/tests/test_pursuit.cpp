#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fbp/experiments.hpp"
#include "fbp/pursuit.hpp"
#include "oracles.hpp"

using namespace fbp;

namespace {

struct Instance {
  SparseSignal x;
  DenseMatrix phi;
  DenseVector y;
};

Instance gaussian_instance(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed,
                           Ensemble ens = Ensemble::Gaussian) {
  Rng rng(seed);
  Instance inst;
  inst.x = sample_sparse_signal(n, k, ens, rng);
  inst.phi = sample_observation_matrix(m, n, rng);
  inst.y = observe(inst.phi, inst.x).y;
  return inst;
}

FbpConfig fbp_config(std::size_t alpha, std::size_t beta, std::size_t k_max) {
  FbpConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.epsilon = 1e-6;
  c.k_max = k_max;
  return c;
}

// max_j |phi_j^T r| over j in support, relative to |Phi|_inf |y|.
double support_correlation(const DenseMatrix& phi, const IndexSet& support, const DenseVector& w,
                           const DenseVector& y) {
  const DenseVector r = residual(phi, support, w.span(), y);
  const auto c = oracle::naive_transpose_multiply(phi, r);
  double worst = 0.0;
  for (std::size_t j : support) worst = std::max(worst, std::fabs(c[j]));
  return worst / (norm_inf(phi) * norm2(y.span()));
}

double residual_of(const DenseMatrix& phi, const IndexSet& support, const DenseVector& y) {
  if (support.empty()) return norm2(y.span());
  return oracle::fit_residual(phi, support.indices(), y);
}

DenseVector coeffs_on(const SparseSignal& s) { return DenseVector(s.values); }

}  // namespace

// ---------------------------------------------------------------------------
// Config validation

TEST(FbpConfigTest, Validation) {
  EXPECT_NO_THROW(fbp_config(2, 1, 1).validate());
  EXPECT_THROW(fbp_config(1, 0, 5).validate(), InvalidConfig);
  EXPECT_THROW(fbp_config(3, 3, 5).validate(), InvalidConfig);
  EXPECT_THROW(fbp_config(3, 0, 5).validate(), InvalidConfig);
  EXPECT_THROW(fbp_config(5, 1, 3).validate(), InvalidConfig);
  FbpConfig bad = fbp_config(3, 1, 5);
  bad.epsilon = 1.0;
  EXPECT_THROW(bad.validate(), InvalidConfig);
  EXPECT_THROW((OmpConfig{1.5, 3}.validate()), InvalidConfig);
  EXPECT_THROW((OmpConfig{1e-6, 0}.validate()), InvalidConfig);
  EXPECT_THROW((SpConfig{0}.validate()), InvalidConfig);
}

TEST(FbpConfigTest, Defaults) {
  const FbpConfig c = FbpConfig::defaults_for(100);
  EXPECT_EQ(c.alpha, 20u);
  EXPECT_EQ(c.beta, 19u);
  EXPECT_EQ(c.k_max, 100u);
  EXPECT_EQ(c.epsilon, 1e-6);
  EXPECT_EQ(FbpConfig::defaults_for(4).alpha, 2u);
}

// ---------------------------------------------------------------------------
// FBP

TEST(Fbp, ZeroObservation) {
  Rng rng(1);
  const DenseMatrix phi = sample_observation_matrix(10, 20, rng);
  const RecoveryResult r = fbp::fbp(phi, DenseVector(10), fbp_config(3, 1, 10));
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
  EXPECT_TRUE(r.estimate.support.empty());
  EXPECT_EQ(r.estimate.length, 20u);
}

TEST(Fbp, IdentityDictionary) {
  SparseSignal x{6, IndexSet{1, 4}, {2.5, -1.0}};
  const DenseMatrix phi = DenseMatrix::identity(6);
  const RecoveryResult r = fbp::fbp(phi, observe(phi, x).y, fbp_config(3, 1, 6));
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
  EXPECT_EQ(r.estimate.support, x.support);
  EXPECT_TRUE(exact_recovery(x, r.estimate));
}

TEST(Fbp, SinusoidBackwardStepRemovesMidpointAtom) {
  // Three closely spaced cosines among well-separated distractors. The atom at
  // the mid frequency correlates best with the two-tone signal, so the forward
  // step picks it together with both true atoms; the backward step drops it.
  const std::size_t m = 32;
  const double f1 = 0.10, f2 = 0.12, f3 = 0.5 * (f1 + f2);
  const std::vector<double> freqs{0.02, f1, f3, f2, 0.30, 0.35, 0.40, 0.45};
  DenseMatrix phi(m, freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double ss = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      phi(t, j) = std::cos(2.0 * std::numbers::pi * freqs[j] * static_cast<double>(t));
      ss += phi(t, j) * phi(t, j);
    }
    for (std::size_t t = 0; t < m; ++t) phi(t, j) /= std::sqrt(ss);
  }
  const SparseSignal x{freqs.size(), IndexSet{1, 3}, {1.0, 1.0}};
  const DenseVector y = observe(phi, x).y;

  // The midpoint atom is the single best match, so OMP would take it first.
  const DenseVector corr = correlate(phi, y);
  EXPECT_EQ(top_k_by_magnitude(corr, 1), (IndexSet{2}));

  FbpConfig cfg = fbp_config(3, 1, m);
  cfg.record_trace = true;
  const RecoveryResult r = fbp::fbp(phi, y, cfg);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace[0].expanded_support, (IndexSet{1, 2, 3}));
  EXPECT_EQ(r.trace[0].support, (IndexSet{1, 3}));
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
  EXPECT_TRUE(exact_recovery(x, r.estimate));
}

TEST(Fbp, RecoversK20AtM100) {
  std::size_t exact = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Instance inst = gaussian_instance(256, 100, 20, derive_seed(77, 20, t));
    const RecoveryResult r = fbp::fbp(inst.phi, inst.y, fbp_config(20, 19, 55));
    exact += exact_recovery(inst.x, r.estimate) ? 1 : 0;
  }
  EXPECT_GE(exact, 196u);
}

TEST(Fbp, IterationInvariants) {
  for (bool skip : {false, true}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Instance inst = gaussian_instance(128, 60, 15, seed);
      FbpConfig cfg = fbp_config(6, 4, 60);
      cfg.skip_backward_projection = skip;
      cfg.record_trace = true;
      const RecoveryResult r = fbp::fbp(inst.phi, inst.y, cfg);
      ASSERT_EQ(r.trace.size(), r.iterations);
      double prev = norm2(inst.y.span());
      for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const IterationTrace& it = r.trace[k];
        // Support grows by alpha - beta per iteration.
        EXPECT_EQ(it.support.size(), (k + 1) * (cfg.alpha - cfg.beta));
        EXPECT_EQ(it.expanded_support.size(), it.support.size() + cfg.beta);
        // Expanding the support cannot increase the least-squares residual.
        EXPECT_LE(it.expanded_residual_norm, prev * (1.0 + 1e-12) + 1e-15);
        EXPECT_NEAR(it.expanded_residual_norm,
                    residual_of(inst.phi, it.expanded_support, inst.y),
                    1e-8 * norm2(inst.y.span()));
        prev = it.residual_norm;
      }
      if (!skip) {
        EXPECT_LE(support_correlation(inst.phi, r.estimate.support, coeffs_on(r.estimate), inst.y),
                  1e-8);
      }
      EXPECT_GE(r.final_residual_norm, 0.0);
      EXPECT_LE(r.estimate.support.size(), cfg.k_max);
    }
  }
}

TEST(Fbp, ResidualOrthogonalAfterEachIteration) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = gaussian_instance(100, 50, 12, seed);
    FbpConfig cfg = fbp_config(5, 3, 50);
    // Run once per prefix length by capping the support size.
    for (std::size_t cap = 2; cap <= 12; cap += 2) {
      cfg.k_max = cap;
      const RecoveryResult r = fbp::fbp(inst.phi, inst.y, cfg);
      EXPECT_LE(support_correlation(inst.phi, r.estimate.support, coeffs_on(r.estimate), inst.y),
                1e-8);
    }
  }
}

TEST(Fbp, ScaleInvariance) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = gaussian_instance(128, 50, 14, seed);
    FbpConfig cfg = fbp_config(8, 6, 50);
    cfg.record_trace = true;
    const RecoveryResult a = fbp::fbp(inst.phi, inst.y, cfg);
    const RecoveryResult b = fbp::fbp(37.0 * inst.phi, inst.y, cfg);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    ASSERT_FALSE(a.trace.empty());
    // Once the fit is exact the surplus atoms carry roundoff-level weights, so
    // only the earlier iterations and the significant final atoms are compared.
    for (std::size_t k = 0; k + 1 < a.trace.size(); ++k) {
      EXPECT_EQ(a.trace[k].expanded_support, b.trace[k].expanded_support);
      EXPECT_EQ(a.trace[k].support, b.trace[k].support);
    }
    EXPECT_EQ(oracle::significant_support(a.estimate),
              oracle::significant_support(b.estimate, 37.0));

    // A power-of-two scale is exact in floating point, so the full trace matches.
    const RecoveryResult p2 = fbp::fbp(1024.0 * inst.phi, inst.y, cfg);
    ASSERT_EQ(a.trace.size(), p2.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      EXPECT_EQ(a.trace[k].expanded_support, p2.trace[k].expanded_support);
      EXPECT_EQ(a.trace[k].support, p2.trace[k].support);
    }
  }
}

TEST(Fbp, Determinism) {
  const Instance inst = gaussian_instance(256, 100, 30, 5);
  const RecoveryResult a = fbp::fbp(inst.phi, inst.y, fbp_config(20, 17, 100));
  const RecoveryResult b = fbp::fbp(inst.phi, inst.y, fbp_config(20, 17, 100));
  EXPECT_EQ(a.estimate.support, b.estimate.support);
  EXPECT_EQ(a.estimate.values, b.estimate.values);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.final_residual_norm, b.final_residual_norm);
}

TEST(Fbp, SupportCapReached) {
  const Instance inst = gaussian_instance(128, 60, 25, 3);
  const RecoveryResult r = fbp::fbp(inst.phi, inst.y, fbp_config(4, 2, 6));
  EXPECT_EQ(r.status, RecoveryStatus::SupportCapReached);
  EXPECT_EQ(r.estimate.support.size(), 6u);
  EXPECT_EQ(r.iterations, 3u);
}

TEST(Fbp, IllPosedWhenExpansionExceedsRows) {
  // K far beyond recoverability with a cap above M: the expansion eventually
  // needs more columns than there are rows.
  const Instance inst = gaussian_instance(64, 20, 18, 9);
  const RecoveryResult r = fbp::fbp(inst.phi, inst.y, fbp_config(6, 3, 60));
  EXPECT_EQ(r.status, RecoveryStatus::IllPosedProjection);
  EXPECT_LE(r.estimate.support.size() + 6, 64u);
  EXPECT_GT(r.estimate.support.size() + 6, 20u);
}

TEST(Fbp, DimensionMismatch) {
  const Instance inst = gaussian_instance(20, 10, 2, 1);
  EXPECT_THROW(fbp::fbp(inst.phi, DenseVector(9), fbp_config(3, 1, 10)), DimensionMismatch);
}

// ---------------------------------------------------------------------------
// OMP

TEST(Omp, IdentityDictionary) {
  SparseSignal x{8, IndexSet{0, 3, 6}, {1.0, -2.0, 0.5}};
  const DenseMatrix phi = DenseMatrix::identity(8);
  const RecoveryResult r = omp(phi, observe(phi, x).y, OmpConfig{1e-6, 8});
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_EQ(r.estimate.support, x.support);
  EXPECT_TRUE(exact_recovery(x, r.estimate));
}

TEST(Omp, ZeroObservation) {
  const RecoveryResult r = omp(DenseMatrix::identity(4), DenseVector(4), OmpConfig{1e-6, 4});
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
  EXPECT_TRUE(r.estimate.support.empty());
}

TEST(Omp, MatchesExhaustiveSearchOnSmallInstances) {
  std::size_t agree = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Instance inst = gaussian_instance(16, 12, 2, derive_seed(11, 2, t));
    // Unit-norm columns keep the greedy correlations comparable across atoms.
    for (std::size_t j = 0; j < inst.phi.cols(); ++j) {
      double ss = 0.0;
      for (std::size_t r = 0; r < inst.phi.rows(); ++r) ss += inst.phi(r, j) * inst.phi(r, j);
      for (std::size_t r = 0; r < inst.phi.rows(); ++r) inst.phi(r, j) /= std::sqrt(ss);
    }
    inst.y = observe(inst.phi, inst.x).y;
    const RecoveryResult a = omp(inst.phi, inst.y, OmpConfig{1e-6, 12});
    const RecoveryResult b = l0_oracle(inst.phi, inst.y, 4);
    agree += a.estimate.support == b.estimate.support ? 1 : 0;
  }
  EXPECT_GE(agree, 90u);
}

TEST(Omp, ResidualOrthogonality) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = gaussian_instance(100, 50, 20, seed);
    const RecoveryResult r = omp(inst.phi, inst.y, OmpConfig{1e-6, 15});
    EXPECT_EQ(r.status, RecoveryStatus::SupportCapReached);
    EXPECT_LE(support_correlation(inst.phi, r.estimate.support, coeffs_on(r.estimate), inst.y),
              1e-8);
  }
}

// ---------------------------------------------------------------------------
// SP

TEST(Sp, IdentityDictionary) {
  SparseSignal x{10, IndexSet{2, 7}, {3.0, -1.0}};
  const DenseMatrix phi = DenseMatrix::identity(10);
  const RecoveryResult r = sp(phi, observe(phi, x).y, SpConfig{2});
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
  EXPECT_EQ(r.estimate.support, x.support);
}

TEST(Sp, RecoversK10AtM100) {
  std::size_t exact = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Instance inst = gaussian_instance(256, 100, 10, derive_seed(78, 10, t));
    exact += exact_recovery(inst.x, sp(inst.phi, inst.y, SpConfig{10}).estimate) ? 1 : 0;
  }
  EXPECT_GE(exact, 190u);
}

TEST(Sp, OversizedSupportContainsTruth) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = gaussian_instance(64, 40, 4, seed);
    const RecoveryResult r = sp(inst.phi, inst.y, SpConfig{8});
    EXPECT_EQ(r.estimate.support.size(), 8u);
    for (std::size_t i : inst.x.support) EXPECT_TRUE(r.estimate.support.contains(i));
    EXPECT_LE(r.final_residual_norm, 1e-8 * norm2(inst.y.span()));
  }
}

TEST(Sp, ResidualOrthogonalityAndSize) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = gaussian_instance(128, 50, 20, seed);
    const RecoveryResult r = sp(inst.phi, inst.y, SpConfig{20});
    if (r.status == RecoveryStatus::IllPosedProjection) continue;
    EXPECT_EQ(r.estimate.support.size(), 20u);
    EXPECT_LE(support_correlation(inst.phi, r.estimate.support, coeffs_on(r.estimate), inst.y),
              1e-8);
  }
}

TEST(Sp, WarnsWhenTwiceKExceedsRows) {
  const Instance inst = gaussian_instance(64, 20, 5, 2);
  const RecoveryResult r = sp(inst.phi, inst.y, SpConfig{12});
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.status, RecoveryStatus::IllPosedProjection);
}

// ---------------------------------------------------------------------------
// Exhaustive search

TEST(L0Oracle, ZeroObservation) {
  Rng rng(1);
  const DenseMatrix phi = sample_observation_matrix(8, 12, rng);
  const RecoveryResult r = l0_oracle(phi, DenseVector(8), 3);
  EXPECT_TRUE(r.estimate.support.empty());
  EXPECT_EQ(r.status, RecoveryStatus::Converged);
}

TEST(L0Oracle, SingleAtom) {
  Rng rng(2);
  const DenseMatrix phi = sample_observation_matrix(8, 12, rng);
  const DenseVector y = 2.0 * phi.column(2);
  const RecoveryResult r = l0_oracle(phi, y, 3);
  EXPECT_EQ(r.estimate.support, (IndexSet{2}));
  ASSERT_EQ(r.estimate.values.size(), 1u);
  EXPECT_NEAR(r.estimate.values[0], 2.0, 1e-10);
}

TEST(L0Oracle, FindsPlantedSupportWhenUnique) {
  std::size_t checked = 0;
  for (std::uint64_t t = 0; t < 30; ++t) {
    const Instance inst = gaussian_instance(16, 12, 2, derive_seed(5, 0, t));
    const double tol = 1e-8 * norm2(inst.y.span());
    if (oracle::count_fitting_supports(inst.phi, inst.y, 2, tol) != 1) continue;
    ++checked;
    EXPECT_EQ(l0_oracle(inst.phi, inst.y, 4).estimate.support, inst.x.support);
  }
  EXPECT_GT(checked, 20u);
}

TEST(L0Oracle, Guards) {
  Rng rng(3);
  const DenseMatrix wide = sample_observation_matrix(10, 25, rng);
  EXPECT_THROW(l0_oracle(wide, DenseVector(10, 1.0), 2), InstanceTooLarge);
  const DenseMatrix ok = sample_observation_matrix(10, 20, rng);
  EXPECT_THROW(l0_oracle(ok, DenseVector(10, 1.0), 5), InstanceTooLarge);
  EXPECT_THROW(l0_oracle(ok, DenseVector(9, 1.0), 2), DimensionMismatch);
}

TEST(L0Oracle, NoExactFitReportsBestSupport) {
  Rng rng(4);
  const DenseMatrix phi = sample_observation_matrix(10, 12, rng);
  const DenseVector y = sample_standard_normal(rng, 10);
  const RecoveryResult r = l0_oracle(phi, y, 2);
  EXPECT_EQ(r.status, RecoveryStatus::ResidualStalled);
  EXPECT_EQ(r.estimate.support.size(), 2u);
  EXPECT_EQ(r.iterations, 12u + 66u);
}

TEST(Recover, DispatchesOnConfig) {
  const Instance inst = gaussian_instance(16, 12, 2, 8);
  EXPECT_EQ(recover(inst.phi, inst.y, L0Config{3}).estimate.support,
            l0_oracle(inst.phi, inst.y, 3).estimate.support);
  EXPECT_EQ(algorithm_name(AlgorithmConfig{SpConfig{}}), "sp");
  EXPECT_EQ(to_string(RecoveryStatus::IllPosedProjection), "ill_posed_projection");
}
