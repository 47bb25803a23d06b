#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "latiso/grid.hpp"
#include "latiso/rng.hpp"
#include "latiso/variogram.hpp"

namespace latiso {

/// Window side l(n) = round(sqrt(side)), floored at 3; the mean-squared-
/// error-optimal order for subsampling variance estimation on a lattice.
/// `side` is the smaller grid dimension and must be at least 9.
int default_window_side(int side);

struct SubsampleWindow {
  Block window;
  VariogramVector vario;
  int effective_size = 0;  // observed cells |D_i| in the window
};

/// Variogram vectors from every overlapping window, with the bias factor
/// f_n = 1 - mean|D_i| / |D_n| used by the subsampling covariance.
struct SubsampleEnsemble {
  int window_side = 0;
  std::vector<SubsampleWindow> windows;
  double f_n = 1.0;
  int k_n = 0;             // retained windows
  int dropped_windows = 0; // windows where the estimator failed
  int grid_observed = 0;   // |D_n|
};

SubsampleEnsemble subsample_ensemble(const Grid& grid, const LagSet& lam, Estimator estimator,
                                     int l, Rng& rng, const VariogramOptions& options = {});

enum class CovarianceSource { subsampling, permutation };

struct CovarianceEstimate {
  Matrix sigma;
  CovarianceSource source = CovarianceSource::subsampling;
  bool robust = false;
};

/// Covariance of the variogram vector from the window ensemble. The
/// non-robust form is the weighted moment sum
///   1/(k_n f_n) * sum_i |D_i| (G_i - Gbar)(G_i - Gbar)^T;
/// the robust form is the reweighted-MCD scatter of the window vectors
/// scaled by mean|D_i| / f_n, which matches the moment form when all
/// windows carry the same weight.
CovarianceEstimate subsampling_covariance(const SubsampleEnsemble& ensemble, bool robust,
                                          Rng& rng);

using BlockMask = std::vector<std::uint8_t>;

/// Rotates the masked blocks 90 degrees clockwise; mask has one entry per
/// block.
Grid apply_block_rotations(const Grid& grid, const std::vector<Block>& blocks,
                           const BlockMask& mask);

/// Rotates each block independently with probability 1/2.
std::pair<Grid, BlockMask> block_permute(const Grid& grid, const std::vector<Block>& blocks,
                                         Rng& rng);

struct PermutationEnsemble {
  int B = 0;
  int block_side = 0;
  std::vector<Block> blocks;
  std::vector<BlockMask> masks;            // one per replicate
  std::vector<VariogramVector> vectors;    // within-blocks estimates per replicate
  VariogramVector original;                // within-blocks estimate of the unpermuted grid
  int n_eff = 0;                           // observed cells covered by the blocks
};

/// B independently permuted grids, each evaluated with the within-blocks
/// restriction; replicate b derives its stream from (rng, b), so results
/// do not depend on the worker count.
PermutationEnsemble permutation_ensemble(const Grid& grid, const LagSet& lam,
                                         Estimator estimator, const std::vector<Block>& blocks,
                                         int B, Rng& rng, int workers = 1,
                                         const VariogramOptions& options = {});

/// Reweighted-MCD scatter of the B permuted vectors, scaled by the
/// within-blocks location count for dimensional consistency with the test
/// statistic (the scaling cancels in the permutation p-value).
CovarianceEstimate permutation_covariance(const PermutationEnsemble& ensemble, Rng& rng);

}  // namespace latiso
