#include <redris/baselines.hpp>
#include <redris/channel.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace {

using redris::ChannelSet;
using redris::CMatrix;
using redris::Complex;
using redris::CVector;
using redris::PhaseShiftMatrix;
using redris::ReflectiveOptions;
using redris::ReflectiveSolution;
using redris::Rng;

CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.cnormal();
  return out;
}

double reflective_mse(const ChannelSet& set, const PhaseShiftMatrix& phi, double p, double sigma2) {
  const CMatrix h = redris::effective_channel_reflective(set, phi);
  const auto pre = redris::mmse_precoder(h, p, sigma2);
  return redris::system_mse(h, pre.f, pre.alpha, sigma2);
}

TEST(PhaseShiftMatrix, DiagonalEntriesHaveExactlyUnitModulus) {
  Rng rng(61);
  const PhaseShiftMatrix phi = PhaseShiftMatrix::random(32, rng);
  const CVector d = phi.diagonal();
  for (int i = 0; i < 32; ++i) EXPECT_NEAR(std::abs(d(i)), 1.0, 1e-15);
  const PhaseShiftMatrix zero(4);
  EXPECT_LE((zero.diagonal() - CVector::Ones(4)).norm(), 0.0);
}

TEST(EffectiveChannelReflective, MatchesAnEntrywiseComputation) {
  Rng rng(62);
  ChannelSet set;
  set.h_bs = random_complex(8, 3, rng);
  set.h_su = random_complex(8, 2, rng);
  set.h_bu = random_complex(3, 2, rng);
  const PhaseShiftMatrix phi = PhaseShiftMatrix::random(8, rng);
  const CVector d = phi.diagonal();
  const CMatrix got = redris::effective_channel_reflective(set, phi);
  ASSERT_EQ(got.rows(), 2);
  ASSERT_EQ(got.cols(), 3);
  for (int m = 0; m < 2; ++m) {
    for (int n = 0; n < 3; ++n) {
      Complex acc = std::conj(set.h_bu(n, m));
      for (int k = 0; k < 8; ++k) acc += std::conj(set.h_su(k, m)) * d(k) * set.h_bs(k, n);
      EXPECT_NEAR(std::abs(got(m, n) - acc), 0.0, 1e-12);
    }
  }
  EXPECT_THROW(redris::effective_channel_reflective(set, PhaseShiftMatrix(4)), std::invalid_argument);
}

// Scalar link through two elements: perfect alignment of both cascade terms
// with the direct path would reach |h_bu| + sum_k |h_su_k h_bs_k|. The
// regularized LS step trades a little alignment for MSE, so the triangle
// bound is a hard ceiling and 90% of it is the regression floor.
TEST(ReflectiveOptimize, ApproachesTheAlignmentBoundOnAScalarLink) {
  Rng rng(63);
  ChannelSet set;
  set.h_su = random_complex(2, 1, rng);
  set.h_bs = random_complex(2, 1, rng);
  set.h_bu = random_complex(1, 1, rng);
  set.noise_var = 0.01;

  double bound = std::abs(set.h_bu(0, 0));
  for (int k = 0; k < 2; ++k) bound += std::abs(set.h_su(k, 0)) * std::abs(set.h_bs(k, 0));

  ReflectiveOptions opts;
  opts.eps = 1e-12;
  opts.t_max = 300;
  const ReflectiveSolution sol = redris::reflective_ris_optimize(set, 1.0, 0.01, opts, rng);
  const double gain = std::abs(redris::effective_channel_reflective(set, sol.phi)(0, 0));
  EXPECT_GE(gain, bound * 0.9);
  EXPECT_LE(gain, bound * (1.0 + 1e-12));
}

// With one element, one user, and no direct link the phase is a global
// rotation of a scalar channel: every theta gives the MSE of the
// magnitude-only channel, so the optimizer cannot do better or worse.
TEST(ReflectiveOptimize, SingleElementPhaseIsAGlobalRotation) {
  Rng rng(68);
  ChannelSet set;
  set.h_su = random_complex(1, 1, rng);
  set.h_bs = random_complex(1, 1, rng);
  set.h_bu = CMatrix::Zero(1, 1);
  set.noise_var = 0.04;

  ChannelSet mag = set;
  mag.h_su(0, 0) = std::abs(set.h_su(0, 0));
  mag.h_bs(0, 0) = std::abs(set.h_bs(0, 0));
  const double mag_mse = reflective_mse(mag, PhaseShiftMatrix(1), 1.0, 0.04);

  for (double theta : {0.0, 0.7, 2.3, -1.9}) {
    PhaseShiftMatrix phi(1);
    phi.theta(0) = theta;
    EXPECT_NEAR(reflective_mse(set, phi, 1.0, 0.04), mag_mse, 1e-12 * mag_mse);
  }
  ReflectiveOptions opts;
  const ReflectiveSolution sol = redris::reflective_ris_optimize(set, 1.0, 0.04, opts, rng);
  EXPECT_NEAR(sol.mse, mag_mse, 1e-12 * mag_mse);
}

TEST(ReflectiveOptimize, NeverLosesToItsInitialization) {
  Rng rng(64);
  for (int rep = 0; rep < 20; ++rep) {
    ChannelSet set;
    set.h_bs = random_complex(16, 4, rng);
    set.h_su = random_complex(16, 2, rng);
    set.h_bu = 0.1 * random_complex(4, 2, rng);
    set.noise_var = 0.1;
    const PhaseShiftMatrix init = PhaseShiftMatrix::random(16, rng);
    ReflectiveOptions opts;
    opts.init = init;
    const ReflectiveSolution sol = redris::reflective_ris_optimize(set, 2.0, 0.1, opts, rng);
    const double init_mse = reflective_mse(set, init, 2.0, 0.1);
    EXPECT_LE(sol.mse, init_mse * (1.0 + 1e-12));
    EXPECT_NEAR(sol.mse_trace.front(), init_mse, 1e-12 * init_mse);
    EXPECT_NEAR(sol.mse, *std::min_element(sol.mse_trace.begin(), sol.mse_trace.end()), 1e-12 * (1.0 + sol.mse));
    EXPECT_NEAR(sol.f.squaredNorm(), 2.0, 1e-8 * 2.0);
  }
}

// One dominant propagation path on each hop rewards phase alignment heavily.
// Random-phase MSE spans orders of magnitude, so individual draws are noisy
// and occasionally beat the locally polished solution; the paired-draw means
// separate cleanly and are the regression guard.
TEST(ReflectiveOptimize, BeatsRandomPhasesInTheMeanOnDominantPathChannels) {
  Rng rng(65);
  const redris::ArrayGeometry ris{4, 4};
  const redris::ArrayGeometry bs{1, 2};
  const redris::ArrayGeometry user{1, 1};
  double mean_opt = 0.0;
  double mean_rnd = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    ChannelSet set;
    set.h_bs = redris::gen_channel(bs, ris, 1, true, 1.0, rng);
    set.h_su = redris::gen_channel(user, ris, 1, true, 1.0, rng);
    set.h_bu = 0.05 * random_complex(2, 1, rng);
    set.noise_var = 0.05;
    ReflectiveOptions opts;
    const ReflectiveSolution sol = redris::reflective_ris_optimize(set, 1.0, 0.05, opts, rng);
    mean_opt += sol.mse;
    mean_rnd += reflective_mse(set, PhaseShiftMatrix::random(16, rng), 1.0, 0.05);
  }
  EXPECT_LT(mean_opt, 0.8 * mean_rnd);
}

TEST(ReflectiveOptimizeMulticell, ScalingsAreTheClosedFormOptimaOfTheFinalPhases) {
  Rng rng(66);
  ChannelSet set;
  set.h_bs = random_complex(16, 3, rng);
  set.h_su = random_complex(16, 3, rng);
  set.h_bu = 0.1 * random_complex(3, 3, rng);
  set.noise_var = 0.2;
  const double p = 1.5;
  ReflectiveOptions opts;
  const ReflectiveSolution sol = redris::reflective_ris_optimize_multicell(set, p, 0.2, opts, rng);

  const CMatrix g = std::sqrt(p) * redris::effective_channel_reflective(set, sol.phi);
  double obj = 0.0;
  for (int i = 0; i < 3; ++i) {
    const CVector v = g.row(i).transpose();
    const Complex alpha = redris::receive_scaling_multicell(v, i, 0.2);
    EXPECT_NEAR(std::abs(sol.alphas(i) - alpha), 0.0, 1e-12 * (1.0 + std::abs(alpha)));
    CVector row = alpha * v;
    row(i) -= 1.0;
    obj += row.squaredNorm() + std::norm(alpha) * 0.2;
  }
  EXPECT_NEAR(sol.mse, obj, 1e-12 * (1.0 + obj));
}

TEST(ReflectiveOptimizeMulticell, NeverLosesToItsInitialization) {
  Rng rng(67);
  for (int rep = 0; rep < 10; ++rep) {
    ChannelSet set;
    set.h_bs = random_complex(16, 4, rng);
    set.h_su = random_complex(16, 4, rng);
    set.h_bu = 0.1 * random_complex(4, 4, rng);
    set.noise_var = 0.1;
    const PhaseShiftMatrix init = PhaseShiftMatrix::random(16, rng);
    ReflectiveOptions opts;
    opts.init = init;
    const ReflectiveSolution sol = redris::reflective_ris_optimize_multicell(set, 1.0, 0.1, opts, rng);
    EXPECT_LE(sol.mse, sol.mse_trace.front() * (1.0 + 1e-12));
  }
}

TEST(RandomSwitching, ProducesFullMatchingsAndTracksTheSharedGenerator) {
  Rng a(68), b(68);
  const auto ma = redris::random_switching(64, a);
  const auto mb = redris::random_matching(64, b);
  EXPECT_TRUE(ma.is_full());
  EXPECT_TRUE(ma == mb);
}

}  // namespace
