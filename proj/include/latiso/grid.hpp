#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "latiso/errors.hpp"

namespace latiso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Integer lag vector h = (dx, dy). (0, 0) is not a valid lag.
struct Lag {
  int dx = 0;
  int dy = 0;

  friend bool operator==(const Lag& a, const Lag& b) { return a.dx == b.dx && a.dy == b.dy; }
  friend bool operator!=(const Lag& a, const Lag& b) { return !(a == b); }
};

inline Lag negate(Lag h) { return {-h.dx, -h.dy}; }

/// Squared Euclidean norm, exact in integers.
inline long long norm2(Lag h) {
  return static_cast<long long>(h.dx) * h.dx + static_cast<long long>(h.dy) * h.dy;
}

inline double norm(Lag h) { return std::sqrt(static_cast<double>(norm2(h))); }

/// Counterclockwise quarter turn: (dx, dy) -> (-dy, dx).
inline Lag rotate90(Lag h) { return {-h.dy, h.dx}; }

/// Cell position. x is the column in [0, cols), y the row in [0, rows)
/// with y increasing upward, so lag (0, 1) is the south-to-north step.
struct GridPos {
  int x = 0;
  int y = 0;

  friend bool operator==(const GridPos& a, const GridPos& b) { return a.x == b.x && a.y == b.y; }
};

/// Rectangular lattice of real values with optional missing cells (stored
/// as NaN). values()(y, x) holds the observation at cell (x, y).
class Grid {
 public:
  Grid(int rows, int cols, double fill = 0.0);

  static Grid with_values(int rows, int cols, Matrix values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  double operator()(int x, int y) const { return values_(y, x); }
  double& operator()(int x, int y) { return values_(y, x); }

  bool is_missing(int x, int y) const { return std::isnan(values_(y, x)); }
  void set_missing(int x, int y) { values_(y, x) = std::numeric_limits<double>::quiet_NaN(); }

  bool in_grid(int x, int y) const { return x >= 0 && x < cols_ && y >= 0 && y < rows_; }

  int observed_count() const;
  bool has_missing() const { return observed_count() != size(); }

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }

  /// Copy of the l-by-l (or w-by-h) subgrid anchored at its lower-left cell.
  Grid subgrid(int x0, int y0, int width, int height) const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  int rows_;
  int cols_;
  Matrix values_;
};

/// Ordered lag set Lambda with its equal-norm groups. Built through
/// make_lag_set, which canonicalizes the input (see below).
struct LagSet {
  std::vector<Lag> lags;
  /// Indices into `lags` partitioned by equal Euclidean norm, groups in
  /// order of first appearance, indices in Lambda order.
  std::vector<std::vector<int>> groups;

  int size() const { return static_cast<int>(lags.size()); }
};

/// Canonicalizes a lag list into a LagSet: exact duplicates and lags whose
/// negation is already present are dropped (h and -h index identical
/// difference sets). Dropped lags are appended to `dropped` when given so
/// callers can warn.
LagSet make_lag_set(const std::vector<Lag>& lags, std::vector<Lag>* dropped = nullptr);

/// The three preset lag sets used throughout: axis steps, axis plus
/// diagonal steps, and the extended set with knight-move lags.
LagSet lambda1();
LagSet lambda2();
LagSet lambda3();

/// Square block of cells anchored at its minimum-x / minimum-y corner.
struct Block {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
  bool rotated = false;
};

/// All anchors s = (x, y) such that both s and s + h are in-grid and
/// non-missing; deterministic row-major order of s.
std::vector<GridPos> pair_set(const Grid& grid, Lag h);

/// Anchors for which every lag in the set can be constructed:
/// the intersection of pair_set over all lags. Signals
/// degenerate-restriction when empty.
std::vector<GridPos> joint_pair_set(const Grid& grid, const LagSet& lam);

/// Same intersection for a plain lag list; empty result is returned, not
/// signalled.
std::vector<GridPos> joint_pair_set_of(const Grid& grid, const std::vector<Lag>& lags);

/// Anchors s such that s and s + h lie in the same block and are
/// non-missing; ordered by block, then row-major within the block.
std::vector<GridPos> within_block_pair_set(const Grid& grid, Lag h,
                                           const std::vector<Block>& blocks);

/// Anchors whose block contains s + h for every given lag.
std::vector<GridPos> within_block_joint_pair_set(const Grid& grid, const std::vector<Lag>& lags,
                                                 const std::vector<Block>& blocks);

/// Number of non-missing cells covered by the blocks.
int blocks_observed_count(const Grid& grid, const std::vector<Block>& blocks);

/// Tiles the largest sub-grid anchored at the grid's top-left corner
/// (minimum x, maximum y) with non-overlapping side-by-side blocks.
/// Remainder rows (bottom) and columns (right) are excluded.
std::vector<Block> partition_blocks(const Grid& grid, int side);

/// All (rows-l+1)*(cols-l+1) overlapping l-by-l windows, row-major.
std::vector<Block> subsample_windows(const Grid& grid, int l);

/// Returns the grid with the block's cells rotated 90 degrees clockwise in
/// place; everything else unchanged. Four applications are the identity.
Grid rotate_block_90(const Grid& grid, const Block& block);

/// Divides all values by the consistency-scaled (1.4826) median absolute
/// deviation of the non-missing cells. Returns the rescaled grid and the
/// scale used. Signals zero-scale when the MAD is 0.
std::pair<Grid, double> standardize_by_mad(const Grid& grid);

}  // namespace latiso
