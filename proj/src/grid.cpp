#include "latiso/grid.hpp"

#include <algorithm>
#include <limits>

#include "latiso/robust.hpp"

namespace latiso {

Grid::Grid(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) fail(errc::invalid_argument, "grid dimensions must be positive");
  values_ = Matrix::Constant(rows, cols, fill);
}

Grid Grid::with_values(int rows, int cols, Matrix values) {
  if (values.rows() != rows || values.cols() != cols)
    fail(errc::invalid_argument, "value matrix does not match grid dimensions");
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x)
      if (!std::isnan(values(y, x)) && !std::isfinite(values(y, x)))
        fail(errc::invalid_argument, "non-missing grid values must be finite");
  Grid g(rows, cols);
  g.values_ = std::move(values);
  return g;
}

int Grid::observed_count() const {
  int count = 0;
  for (int y = 0; y < rows_; ++y)
    for (int x = 0; x < cols_; ++x)
      if (!std::isnan(values_(y, x))) ++count;
  return count;
}

Grid Grid::subgrid(int x0, int y0, int width, int height) const {
  if (x0 < 0 || y0 < 0 || x0 + width > cols_ || y0 + height > rows_)
    fail(errc::invalid_argument, "subgrid exceeds grid extent");
  Grid out(height, width);
  out.values_ = values_.block(y0, x0, height, width);
  return out;
}

bool operator==(const Grid& a, const Grid& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  for (int y = 0; y < a.rows_; ++y)
    for (int x = 0; x < a.cols_; ++x) {
      const double u = a.values_(y, x), v = b.values_(y, x);
      if (std::isnan(u) != std::isnan(v)) return false;
      if (!std::isnan(u) && u != v) return false;
    }
  return true;
}

LagSet make_lag_set(const std::vector<Lag>& lags, std::vector<Lag>* dropped) {
  LagSet out;
  for (const Lag& h : lags) {
    if (h.dx == 0 && h.dy == 0) fail(errc::invalid_argument, "(0, 0) is not a valid lag");
    const bool duplicate = std::any_of(out.lags.begin(), out.lags.end(), [&](const Lag& g) {
      return g == h || g == negate(h);
    });
    if (duplicate) {
      if (dropped) dropped->push_back(h);
      continue;
    }
    out.lags.push_back(h);
  }
  if (out.lags.empty()) fail(errc::invalid_argument, "lag set is empty");

  std::vector<long long> group_norm;
  for (int i = 0; i < out.size(); ++i) {
    const long long n2 = norm2(out.lags[i]);
    auto it = std::find(group_norm.begin(), group_norm.end(), n2);
    if (it == group_norm.end()) {
      group_norm.push_back(n2);
      out.groups.push_back({i});
    } else {
      out.groups[static_cast<size_t>(it - group_norm.begin())].push_back(i);
    }
  }
  return out;
}

LagSet lambda1() { return make_lag_set({{1, 0}, {0, 1}}); }

LagSet lambda2() { return make_lag_set({{1, 0}, {0, 1}, {1, 1}, {1, -1}}); }

LagSet lambda3() {
  return make_lag_set({{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {-1, 2}, {1, 2}, {-2, 1}});
}

std::vector<GridPos> pair_set(const Grid& grid, Lag h) {
  if (std::abs(h.dx) >= grid.cols() || std::abs(h.dy) >= grid.rows())
    fail(errc::invalid_argument, "lag exceeds grid extent");
  std::vector<GridPos> out;
  const int x_lo = std::max(0, -h.dx);
  const int x_hi = std::min(grid.cols(), grid.cols() - h.dx);  // exclusive
  const int y_lo = std::max(0, -h.dy);
  const int y_hi = std::min(grid.rows(), grid.rows() - h.dy);
  for (int y = y_lo; y < y_hi; ++y)
    for (int x = x_lo; x < x_hi; ++x)
      if (!grid.is_missing(x, y) && !grid.is_missing(x + h.dx, y + h.dy)) out.push_back({x, y});
  return out;
}

std::vector<GridPos> joint_pair_set_of(const Grid& grid, const std::vector<Lag>& lags) {
  int x_lo = 0, x_hi = grid.cols(), y_lo = 0, y_hi = grid.rows();
  for (const Lag& h : lags) {
    if (std::abs(h.dx) >= grid.cols() || std::abs(h.dy) >= grid.rows())
      fail(errc::invalid_argument, "lag exceeds grid extent");
    x_lo = std::max(x_lo, -h.dx);
    x_hi = std::min(x_hi, grid.cols() - h.dx);
    y_lo = std::max(y_lo, -h.dy);
    y_hi = std::min(y_hi, grid.rows() - h.dy);
  }
  std::vector<GridPos> out;
  for (int y = y_lo; y < y_hi; ++y)
    for (int x = x_lo; x < x_hi; ++x) {
      if (grid.is_missing(x, y)) continue;
      bool ok = true;
      for (const Lag& h : lags)
        if (grid.is_missing(x + h.dx, y + h.dy)) {
          ok = false;
          break;
        }
      if (ok) out.push_back({x, y});
    }
  return out;
}

std::vector<GridPos> joint_pair_set(const Grid& grid, const LagSet& lam) {
  std::vector<GridPos> out = joint_pair_set_of(grid, lam.lags);
  if (out.empty()) fail(errc::degenerate_restriction, "no location supports every lag in the set");
  return out;
}

std::vector<Block> partition_blocks(const Grid& grid, int side) {
  if (side < 2) fail(errc::invalid_block_size, "block side must be at least 2");
  if (side > std::min(grid.rows(), grid.cols()))
    fail(errc::invalid_block_size, "block side exceeds grid dimensions");
  const int nx = grid.cols() / side;
  const int ny = grid.rows() / side;
  std::vector<Block> blocks;
  blocks.reserve(static_cast<size_t>(nx) * ny);
  for (int by = 0; by < ny; ++by)
    for (int bx = 0; bx < nx; ++bx)
      blocks.push_back({bx * side, grid.rows() - (by + 1) * side, side, false});
  return blocks;
}

std::vector<Block> subsample_windows(const Grid& grid, int l) {
  if (l < 2) fail(errc::invalid_block_size, "window side must be at least 2");
  if (l > std::min(grid.rows(), grid.cols()))
    fail(errc::invalid_block_size, "window side exceeds grid dimensions");
  std::vector<Block> windows;
  windows.reserve(static_cast<size_t>(grid.rows() - l + 1) * (grid.cols() - l + 1));
  for (int y0 = grid.rows() - l; y0 >= 0; --y0)
    for (int x0 = 0; x0 + l <= grid.cols(); ++x0) windows.push_back({x0, y0, l, false});
  return windows;
}

std::vector<GridPos> within_block_pair_set(const Grid& grid, Lag h,
                                           const std::vector<Block>& blocks) {
  return within_block_joint_pair_set(grid, {h}, blocks);
}

std::vector<GridPos> within_block_joint_pair_set(const Grid& grid, const std::vector<Lag>& lags,
                                                 const std::vector<Block>& blocks) {
  std::vector<GridPos> out;
  for (const Block& block : blocks) {
    int x_lo = block.x0, x_hi = block.x0 + block.side;
    int y_lo = block.y0, y_hi = block.y0 + block.side;
    for (const Lag& h : lags) {
      x_lo = std::max(x_lo, block.x0 - h.dx);
      x_hi = std::min(x_hi, block.x0 + block.side - h.dx);
      y_lo = std::max(y_lo, block.y0 - h.dy);
      y_hi = std::min(y_hi, block.y0 + block.side - h.dy);
    }
    for (int y = y_lo; y < y_hi; ++y)
      for (int x = x_lo; x < x_hi; ++x) {
        if (grid.is_missing(x, y)) continue;
        bool ok = true;
        for (const Lag& h : lags)
          if (grid.is_missing(x + h.dx, y + h.dy)) {
            ok = false;
            break;
          }
        if (ok) out.push_back({x, y});
      }
  }
  return out;
}

int blocks_observed_count(const Grid& grid, const std::vector<Block>& blocks) {
  int count = 0;
  for (const Block& block : blocks)
    for (int y = block.y0; y < block.y0 + block.side; ++y)
      for (int x = block.x0; x < block.x0 + block.side; ++x)
        if (!grid.is_missing(x, y)) ++count;
  return count;
}

Grid rotate_block_90(const Grid& grid, const Block& block) {
  if (block.side < 1) fail(errc::non_square_block, "block side must be positive");
  if (!grid.in_grid(block.x0, block.y0) ||
      !grid.in_grid(block.x0 + block.side - 1, block.y0 + block.side - 1))
    fail(errc::non_square_block, "block does not lie within the grid");
  Grid out = grid;
  // Clockwise quarter turn of the block contents: the cell at local
  // coordinates (u, v) receives the value from (side-1-v, u).
  const int s = block.side;
  for (int v = 0; v < s; ++v)
    for (int u = 0; u < s; ++u)
      out(block.x0 + u, block.y0 + v) = grid(block.x0 + (s - 1 - v), block.y0 + u);
  return out;
}

std::pair<Grid, double> standardize_by_mad(const Grid& grid) {
  std::vector<double> observed;
  observed.reserve(static_cast<size_t>(grid.size()));
  for (int y = 0; y < grid.rows(); ++y)
    for (int x = 0; x < grid.cols(); ++x)
      if (!grid.is_missing(x, y)) observed.push_back(grid(x, y));
  if (observed.size() < 2) fail(errc::too_few_points, "need at least 2 observed cells");
  Vector v = Eigen::Map<const Vector>(observed.data(), static_cast<Eigen::Index>(observed.size()));
  const double scale = mad(v);
  if (scale <= 0.0) fail(errc::zero_scale, "median absolute deviation is zero");
  Grid out = grid;
  out.values() /= scale;
  return {std::move(out), scale};
}

}  // namespace latiso
