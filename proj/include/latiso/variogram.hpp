#pragma once

#include <utility>
#include <vector>

#include "latiso/grid.hpp"
#include "latiso/rng.hpp"

namespace latiso {

enum class Estimator { matheron, genton, mcd_diff };
enum class Restriction { per_lag, joint, within_blocks };

const char* estimator_name(Estimator e) noexcept;

/// Variogram estimates (2 gamma-hat per lag) over a lag set, with the
/// number of differences or difference vectors behind each entry.
struct VariogramVector {
  LagSet lam;
  Vector estimates;
  Eigen::VectorXi pair_counts;
  Estimator estimator = Estimator::matheron;
  Restriction restriction = Restriction::per_lag;
  /// Set when a zero-variability difference sample made an estimate exactly
  /// 0 without going through the scatter estimator.
  bool degenerate = false;
};

/// Method-of-moments estimate: mean of squared differences over the given
/// anchor locations. Returns (estimate, count).
std::pair<double, int> matheron(const Grid& grid, Lag h, const std::vector<GridPos>& locations);

/// Squared Qn scale of the difference sample over the given anchors.
std::pair<double, int> genton(const Grid& grid, Lag h, const std::vector<GridPos>& locations);

struct VariogramOptions {
  bool mcd_correction = true;  // small-sample correction of MCD.diff estimates
  int mcd_k = -1;              // MCD subset size; -1 = floor((n+p+1)/2)
};

/// Joint directional estimate: stacks difference vectors
/// W(s) = (Z(s) - Z(s + h_1), ..., Z(s) - Z(s + h_p)) over every anchor
/// whose components all exist, runs the reweighted MCD on them, and
/// returns the diagonal of the scatter times the small-sample correction
/// factor. All lags must be integer multiples of one direction vector.
/// `degenerate` is set instead of erroring when all vectors are identical.
Vector mcd_diff(const Grid& grid, const std::vector<Lag>& lags,
                const std::vector<GridPos>& locations, Rng& rng,
                const VariogramOptions& options = {}, bool* degenerate = nullptr,
                int* n_vectors = nullptr);

/// Monte Carlo calibrated multiplicative correction for the small-sample
/// bias of the reweighted-MCD variogram estimate, keyed by the number of
/// difference vectors and their dimension. Interpolated from a calibration
/// table; 1 beyond the calibrated range.
double mcd_diff_correction(int n_vectors, int p);

/// Estimates the full vector over a lag set. Matheron and Genton are
/// evaluated per lag, MCD.diff per direction group. The restriction
/// chooses the anchor sets: each lag's own pair set, the joint pair set of
/// the whole lag set, or within-block pairs only (requires `blocks`).
/// `rng` is required for the MCD.diff estimator.
VariogramVector estimate_vector(const Grid& grid, const LagSet& lam, Estimator estimator,
                                Restriction restriction,
                                const std::vector<Block>* blocks = nullptr, Rng* rng = nullptr,
                                const VariogramOptions& options = {});

}  // namespace latiso
