#pragma once

#include <vector>

#include "latiso/grid.hpp"
#include "latiso/rng.hpp"

namespace latiso::testing {

/// Random grid whose values lie on a dyadic lattice (multiples of 2^-16,
/// about 21 significant bits), so that adding a similarly-representable
/// constant or scaling by a power of two is exact in floating point.
inline Grid random_dyadic_grid(int rows, int cols, Rng& rng, double missing_rate = 0.0) {
  Grid g(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      if (missing_rate > 0.0 && rng.uniform() < missing_rate) {
        g.set_missing(x, y);
      } else {
        const double steps = static_cast<double>(rng.uniform_below(1 << 21)) - (1 << 20);
        g(x, y) = steps * 0x1.0p-16;
      }
    }
  return g;
}

inline Grid random_gaussian_grid(int rows, int cols, Rng& rng) {
  Grid g(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) g(x, y) = rng.normal();
  return g;
}

/// Grid from rows written top-to-bottom, the way a CSV file reads.
inline Grid grid_from_rows(const std::vector<std::vector<double>>& rows) {
  const int n_rows = static_cast<int>(rows.size());
  const int n_cols = static_cast<int>(rows.front().size());
  Grid g(n_rows, n_cols);
  for (int i = 0; i < n_rows; ++i)
    for (int x = 0; x < n_cols; ++x)
      g(x, n_rows - 1 - i) = rows[static_cast<size_t>(i)][static_cast<size_t>(x)];
  return g;
}

}  // namespace latiso::testing
