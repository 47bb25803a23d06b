#include "latiso/resampling.hpp"

#include <algorithm>
#include <cmath>

#include "latiso/errors.hpp"
#include "latiso/parallel.hpp"
#include "latiso/robust.hpp"

namespace latiso {

int default_window_side(int side) {
  if (side < 9) fail(errc::grid_too_small, "subsampling needs a grid side of at least 9");
  return std::max(3L, std::lround(std::sqrt(static_cast<double>(side))));
}

namespace {

bool is_drop_reason(errc code) {
  switch (code) {
    case errc::degenerate_restriction:
    case errc::empty_locations:
    case errc::too_few_points:
    case errc::too_few_vectors:
    case errc::too_few_weighted:
    case errc::singular_scatter:
      return true;
    default:
      return false;
  }
}

void check_lags_fit(const LagSet& lam, int side, errc code) {
  for (const Lag& h : lam.lags)
    if (std::abs(h.dx) >= side || std::abs(h.dy) >= side)
      fail(code, "side " + std::to_string(side) + " cannot form every lag in the set");
}

}  // namespace

SubsampleEnsemble subsample_ensemble(const Grid& grid, const LagSet& lam, Estimator estimator,
                                     int l, Rng& rng, const VariogramOptions& options) {
  check_lags_fit(lam, l, errc::invalid_block_size);
  const std::vector<Block> windows = subsample_windows(grid, l);

  SubsampleEnsemble out;
  out.window_side = l;
  out.grid_observed = grid.observed_count();
  out.windows.reserve(windows.size());

  for (size_t i = 0; i < windows.size(); ++i) {
    const Block& win = windows[i];
    const Grid sub = grid.subgrid(win.x0, win.y0, l, l);
    Rng stream = rng.child(i);
    try {
      SubsampleWindow entry;
      entry.window = win;
      entry.vario = estimate_vector(sub, lam, estimator, Restriction::joint, nullptr, &stream,
                                    options);
      entry.effective_size = sub.observed_count();
      out.windows.push_back(std::move(entry));
    } catch (const error& e) {
      if (is_drop_reason(e.code()))
        ++out.dropped_windows;
      else
        throw;
    }
  }
  out.k_n = static_cast<int>(out.windows.size());
  if (out.k_n < 2) fail(errc::all_windows_failed, "fewer than 2 usable subsampling windows");

  double mean_size = 0.0;
  for (const SubsampleWindow& w : out.windows) mean_size += w.effective_size;
  mean_size /= out.k_n;
  out.f_n = 1.0 - mean_size / out.grid_observed;
  if (!(out.f_n > 0.0)) fail(errc::grid_too_small, "window covers the whole grid (f_n <= 0)");
  return out;
}

CovarianceEstimate subsampling_covariance(const SubsampleEnsemble& ensemble, bool robust,
                                          Rng& rng) {
  const int k_n = ensemble.k_n;
  if (k_n < 2) fail(errc::too_few_points, "subsampling covariance needs at least 2 windows");
  const int p = ensemble.windows.front().vario.lam.size();
  if (k_n < p + 2)
    fail(errc::too_few_points, "subsampling covariance needs at least |lags| + 2 windows");

  Matrix g(k_n, p);
  Vector sizes(k_n);
  for (int i = 0; i < k_n; ++i) {
    g.row(i) = ensemble.windows[static_cast<size_t>(i)].vario.estimates.transpose();
    sizes[i] = ensemble.windows[static_cast<size_t>(i)].effective_size;
  }

  CovarianceEstimate out;
  out.source = CovarianceSource::subsampling;
  out.robust = robust;
  if (!robust) {
    const Vector mean = g.colwise().mean();
    Matrix sigma = Matrix::Zero(p, p);
    for (int i = 0; i < k_n; ++i) {
      const Vector d = g.row(i).transpose() - mean;
      sigma.noalias() += sizes[i] * (d * d.transpose());
    }
    sigma /= (k_n * ensemble.f_n);
    out.sigma = 0.5 * (sigma + sigma.transpose());  // exact symmetry
    return out;
  }
  const McdResult fit = mcd_reweighted(g, mcd_default_k(k_n, p), rng);
  out.sigma = fit.scatter * (sizes.mean() / ensemble.f_n);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  return out;
}

Grid apply_block_rotations(const Grid& grid, const std::vector<Block>& blocks,
                           const BlockMask& mask) {
  if (mask.size() != blocks.size())
    fail(errc::invalid_argument, "mask size does not match block count");
  Grid out = grid;
  for (size_t i = 0; i < blocks.size(); ++i)
    if (mask[i]) out = rotate_block_90(out, blocks[i]);
  return out;
}

std::pair<Grid, BlockMask> block_permute(const Grid& grid, const std::vector<Block>& blocks,
                                         Rng& rng) {
  BlockMask mask(blocks.size());
  for (size_t i = 0; i < blocks.size(); ++i) mask[i] = rng.coin() ? 1 : 0;
  return {apply_block_rotations(grid, blocks, mask), std::move(mask)};
}

PermutationEnsemble permutation_ensemble(const Grid& grid, const LagSet& lam,
                                         Estimator estimator, const std::vector<Block>& blocks,
                                         int B, Rng& rng, int workers,
                                         const VariogramOptions& options) {
  if (B < 100) fail(errc::invalid_argument, "permutation test needs B >= 100");
  if (blocks.empty()) fail(errc::invalid_argument, "block partition is empty");
  const int side = blocks.front().side;
  check_lags_fit(lam, side, errc::block_too_small_for_lagset);

  PermutationEnsemble out;
  out.B = B;
  out.block_side = side;
  out.blocks = blocks;
  out.n_eff = blocks_observed_count(grid, blocks);

  Rng original_stream = rng.child(0);
  out.original = estimate_vector(grid, lam, estimator, Restriction::within_blocks, &blocks,
                                 &original_stream, options);

  out.masks.resize(static_cast<size_t>(B));
  out.vectors.resize(static_cast<size_t>(B));
  parallel_for(B, workers, [&](int b) {
    Rng stream = rng.child(static_cast<std::uint64_t>(b) + 1);
    auto [permuted, mask] = block_permute(grid, blocks, stream);
    out.masks[static_cast<size_t>(b)] = std::move(mask);
    out.vectors[static_cast<size_t>(b)] = estimate_vector(
        permuted, lam, estimator, Restriction::within_blocks, &blocks, &stream, options);
  });
  return out;
}

CovarianceEstimate permutation_covariance(const PermutationEnsemble& ensemble, Rng& rng) {
  const int B = ensemble.B;
  const int p = ensemble.original.lam.size();
  if (B < p + 2) fail(errc::too_few_points, "permutation covariance needs B >= |lags| + 2");
  Matrix g(B, p);
  for (int b = 0; b < B; ++b) g.row(b) = ensemble.vectors[static_cast<size_t>(b)].estimates.transpose();
  const McdResult fit = mcd_reweighted(g, mcd_default_k(B, p), rng);
  CovarianceEstimate out;
  out.source = CovarianceSource::permutation;
  out.robust = true;
  out.sigma = fit.scatter * static_cast<double>(ensemble.n_eff);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  return out;
}

}  // namespace latiso
