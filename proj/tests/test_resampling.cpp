#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "latiso/errors.hpp"
#include "latiso/resampling.hpp"
#include "test_helpers.hpp"

using namespace latiso;
using latiso::testing::random_dyadic_grid;

TEST_CASE("default window side") {
  CHECK(default_window_side(24) == 5);
  CHECK(default_window_side(40) == 6);
  CHECK(default_window_side(9) == 3);
  CHECK_THROWS_AS(default_window_side(8), error);
}

TEST_CASE("subsample ensemble window count and bias factor") {
  Rng grid_rng(1);
  const Grid g = random_dyadic_grid(24, 24, grid_rng);
  Rng rng(2);
  const SubsampleEnsemble ens = subsample_ensemble(g, lambda1(), Estimator::matheron, 5, rng);
  CHECK(ens.k_n == 400);
  CHECK(ens.dropped_windows == 0);
  CHECK(ens.f_n == doctest::Approx(1.0 - 25.0 / 576.0).epsilon(1e-12));
  for (const SubsampleWindow& w : ens.windows) CHECK(w.effective_size == 25);
}

TEST_CASE("subsample ensemble on a constant grid produces zero vectors") {
  const Grid g(12, 12, 4.0);
  Rng rng(3);
  const SubsampleEnsemble ens = subsample_ensemble(g, lambda1(), Estimator::matheron, 4, rng);
  for (const SubsampleWindow& w : ens.windows) CHECK(w.vario.estimates.maxCoeff() == 0.0);
}

TEST_CASE("moment covariance matches a hand-computed three-vector example") {
  // Three scalar window vectors with hand-picked values and weights:
  //   G = {1, 2, 6}, |D_i| = {10, 12, 14}, f_n = 0.75, Gbar = 3
  //   sum = 10*4 + 12*1 + 14*9 = 178, sigma = 178 / (3 * 0.75)
  Rng grid_rng(4);
  const Grid g = random_dyadic_grid(6, 8, grid_rng);
  Rng rng(5);
  SubsampleEnsemble ens =
      subsample_ensemble(g, make_lag_set({{1, 0}}), Estimator::matheron, 4, rng);
  ens.windows.resize(3);
  ens.k_n = 3;
  ens.f_n = 0.75;
  ens.windows[0].vario.estimates[0] = 1.0;
  ens.windows[0].effective_size = 10;
  ens.windows[1].vario.estimates[0] = 2.0;
  ens.windows[1].effective_size = 12;
  ens.windows[2].vario.estimates[0] = 6.0;
  ens.windows[2].effective_size = 14;

  const CovarianceEstimate cov = subsampling_covariance(ens, false, rng);
  CHECK(cov.sigma(0, 0) == doctest::Approx(178.0 / 2.25).epsilon(1e-12));
}

TEST_CASE("moment covariance matches independent scalar arithmetic in two dimensions") {
  Rng grid_rng(4);
  const Grid g = random_dyadic_grid(6, 8, grid_rng);
  Rng rng(5);
  SubsampleEnsemble ens = subsample_ensemble(g, lambda1(), Estimator::matheron, 4, rng);
  ens.windows.resize(4);
  ens.k_n = 4;
  ens.f_n = 0.8;

  const CovarianceEstimate cov = subsampling_covariance(ens, false, rng);

  double mean0 = 0.0, mean1 = 0.0;
  for (int i = 0; i < 4; ++i) {
    mean0 += ens.windows[static_cast<size_t>(i)].vario.estimates[0] / 4.0;
    mean1 += ens.windows[static_cast<size_t>(i)].vario.estimates[1] / 4.0;
  }
  double s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d0 = ens.windows[static_cast<size_t>(i)].vario.estimates[0] - mean0;
    const double d1 = ens.windows[static_cast<size_t>(i)].vario.estimates[1] - mean1;
    const double w = ens.windows[static_cast<size_t>(i)].effective_size;
    s00 += w * d0 * d0;
    s01 += w * d0 * d1;
    s11 += w * d1 * d1;
  }
  const double scale = 1.0 / (4.0 * 0.8);
  CHECK(cov.sigma(0, 0) == doctest::Approx(s00 * scale).epsilon(1e-12));
  CHECK(cov.sigma(0, 1) == doctest::Approx(s01 * scale).epsilon(1e-12));
  CHECK(cov.sigma(1, 1) == doctest::Approx(s11 * scale).epsilon(1e-12));
  CHECK(cov.sigma(0, 1) == cov.sigma(1, 0));
}

TEST_CASE("moment covariance: identical windows give the zero matrix") {
  const Grid g(10, 10, 1.0);
  Rng rng(6);
  SubsampleEnsemble ens = subsample_ensemble(g, lambda1(), Estimator::matheron, 4, rng);
  const CovarianceEstimate cov = subsampling_covariance(ens, false, rng);
  CHECK(cov.sigma.norm() == 0.0);
}

TEST_CASE("duplicating every window leaves the moment estimate unchanged") {
  Rng grid_rng(7);
  const Grid g = random_dyadic_grid(10, 10, grid_rng);
  Rng rng(8);
  SubsampleEnsemble ens = subsample_ensemble(g, lambda2(), Estimator::matheron, 5, rng);
  const CovarianceEstimate one = subsampling_covariance(ens, false, rng);

  SubsampleEnsemble doubled = ens;
  doubled.windows.insert(doubled.windows.end(), ens.windows.begin(), ens.windows.end());
  doubled.k_n = 2 * ens.k_n;
  const CovarianceEstimate two = subsampling_covariance(doubled, false, rng);
  CHECK((one.sigma - two.sigma).norm() <= 1e-12 * (1.0 + one.sigma.norm()));
}

TEST_CASE("eq-3 output is symmetric positive semi-definite") {
  Rng grid_rng(9);
  const Grid g = random_dyadic_grid(14, 14, grid_rng);
  Rng rng(10);
  const SubsampleEnsemble ens = subsample_ensemble(g, lambda2(), Estimator::matheron, 5, rng);
  const CovarianceEstimate cov = subsampling_covariance(ens, false, rng);
  CHECK((cov.sigma - cov.sigma.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov.sigma, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * cov.sigma.trace());
}

TEST_CASE("robust covariance stays on the moment scale for homogeneous windows") {
  Rng grid_rng(11);
  Grid g(24, 24, 0.0);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) g(x, y) = grid_rng.normal();
  Rng rng(12);
  SubsampleEnsemble ens = subsample_ensemble(g, lambda1(), Estimator::matheron, 5, rng);
  Rng r1(13), r2(14);
  const CovarianceEstimate robust = subsampling_covariance(ens, true, r1);
  const CovarianceEstimate moment = subsampling_covariance(ens, false, r2);
  // same order of magnitude; the MCD trims tails so only a loose match
  CHECK(robust.sigma(0, 0) > 0.2 * moment.sigma(0, 0));
  CHECK(robust.sigma(0, 0) < 5.0 * moment.sigma(0, 0));
}

TEST_CASE("block mask semantics") {
  Rng grid_rng(15);
  const Grid g = random_dyadic_grid(12, 12, grid_rng, 0.05);
  const auto blocks = partition_blocks(g, 6);

  const BlockMask zeros(blocks.size(), 0);
  CHECK(apply_block_rotations(g, blocks, zeros) == g);

  const BlockMask ones(blocks.size(), 1);
  Grid rotated = g;
  for (int i = 0; i < 4; ++i) rotated = apply_block_rotations(rotated, blocks, ones);
  CHECK(rotated == g);

  // rotation permutes cells: the value multiset is preserved
  const Grid once = apply_block_rotations(g, blocks, ones);
  std::multiset<double> before, after;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) {
      if (!g.is_missing(x, y)) before.insert(g(x, y));
      if (!once.is_missing(x, y)) after.insert(once(x, y));
    }
  CHECK(before == after);
}

TEST_CASE("block_permute rotates roughly half the blocks") {
  const Grid g(24, 24, 0.0);
  const auto blocks = partition_blocks(g, 6);
  Rng rng(16);
  int ones = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto [permuted, mask] = block_permute(g, blocks, rng);
    (void)permuted;
    for (const auto bit : mask) ones += bit;
  }
  CHECK(ones > 650);
  CHECK(ones < 950);
}

TEST_CASE("within-block differences under a full rotation swap the axes") {
  Rng grid_rng(17);
  const Grid g = random_dyadic_grid(12, 12, grid_rng);
  const auto blocks = partition_blocks(g, 6);
  const BlockMask ones(blocks.size(), 1);
  const Grid rotated = apply_block_rotations(g, blocks, ones);

  const VariogramVector base =
      estimate_vector(g, lambda1(), Estimator::matheron, Restriction::within_blocks, &blocks);
  const VariogramVector perm = estimate_vector(rotated, lambda1(), Estimator::matheron,
                                               Restriction::within_blocks, &blocks);
  // blocks tile the grid, so the (1,0) and (0,1) estimates swap exactly
  CHECK(perm.estimates[0] == doctest::Approx(base.estimates[1]).epsilon(1e-13));
  CHECK(perm.estimates[1] == doctest::Approx(base.estimates[0]).epsilon(1e-13));
}

TEST_CASE("rotated-block difference multisets re-appear at the rotated lag") {
  Rng grid_rng(18);
  const Grid g = random_dyadic_grid(8, 8, grid_rng);
  const auto blocks = partition_blocks(g, 4);
  REQUIRE(blocks.size() == 4);
  BlockMask mask{1, 0, 0, 1};
  const Grid permuted = apply_block_rotations(g, blocks, mask);

  for (const Lag h : {Lag{1, 0}, Lag{0, 1}, Lag{1, 1}}) {
    std::multiset<double> got;
    for (const GridPos& s : within_block_pair_set(permuted, h, blocks)) {
      const double d = permuted(s.x, s.y) - permuted(s.x + h.dx, s.y + h.dy);
      got.insert(std::fabs(d));
    }
    // expected: unrotated blocks contribute differences at h, rotated
    // blocks the original differences at the quarter-turn image of h
    std::multiset<double> expected;
    for (size_t b = 0; b < blocks.size(); ++b) {
      const std::vector<Block> one{blocks[b]};
      const Lag lag = mask[b] ? rotate90(h) : h;
      for (const GridPos& s : within_block_pair_set(g, lag, one)) {
        const double d = g(s.x, s.y) - g(s.x + lag.dx, s.y + lag.dy);
        expected.insert(std::fabs(d));
      }
    }
    CHECK(got == expected);
  }
}

TEST_CASE("permutation ensemble shapes and determinism") {
  Rng grid_rng(19);
  const Grid g = random_dyadic_grid(12, 12, grid_rng);
  const auto blocks = partition_blocks(g, 6);
  Rng r1(20), r2(20);
  const PermutationEnsemble a =
      permutation_ensemble(g, lambda2(), Estimator::matheron, blocks, 100, r1, 1);
  const PermutationEnsemble b =
      permutation_ensemble(g, lambda2(), Estimator::matheron, blocks, 100, r2, 2);
  CHECK(a.vectors.size() == 100);
  CHECK(a.n_eff == 144);
  for (int i = 0; i < 100; ++i) {
    CHECK((a.vectors[static_cast<size_t>(i)].estimates -
           b.vectors[static_cast<size_t>(i)].estimates).norm() == 0.0);
    CHECK(a.masks[static_cast<size_t>(i)] == b.masks[static_cast<size_t>(i)]);
  }
  CHECK((a.original.estimates - b.original.estimates).norm() == 0.0);

  CHECK_THROWS_AS(permutation_ensemble(g, lambda2(), Estimator::matheron, blocks, 50, r1, 1),
                  error);
  CHECK_THROWS_AS(
      permutation_ensemble(g, lambda3(), Estimator::matheron, partition_blocks(g, 2), 100, r1, 1),
      error);
}

TEST_CASE("permutation covariance scale equivariance and dimensions") {
  Rng grid_rng(21);
  // enough blocks that the permuted vectors do not collapse onto a few
  // duplicated mask images
  const Grid g = random_dyadic_grid(24, 24, grid_rng);
  Grid scaled = g;
  scaled.values() *= 2.0;
  const auto blocks = partition_blocks(g, 6);

  Rng r1(22), r2(22);
  const PermutationEnsemble ea =
      permutation_ensemble(g, lambda2(), Estimator::matheron, blocks, 150, r1, 1);
  const PermutationEnsemble eb =
      permutation_ensemble(scaled, lambda2(), Estimator::matheron, blocks, 150, r2, 1);
  Rng c1(23), c2(23);
  const CovarianceEstimate ca = permutation_covariance(ea, c1);
  const CovarianceEstimate cb = permutation_covariance(eb, c2);
  CHECK(ca.sigma.rows() == 4);
  CHECK(ca.sigma.cols() == 4);
  // grid scaled by c = 2 scales the covariance of squared-difference
  // statistics by c^4 = 16, exactly for a power of two
  CHECK((cb.sigma - 16.0 * ca.sigma).norm() == 0.0);
}

TEST_CASE("permutation covariance of identical vectors signals singular scatter") {
  const Grid g(12, 12, 1.0);
  const auto blocks = partition_blocks(g, 6);
  Rng rng(24);
  const PermutationEnsemble ens =
      permutation_ensemble(g, lambda1(), Estimator::matheron, blocks, 100, rng, 1);
  Rng cov_rng(25);
  CHECK_THROWS_AS(permutation_covariance(ens, cov_rng), error);
}
