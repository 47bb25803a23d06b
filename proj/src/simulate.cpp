#include "latiso/simulate.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "latiso/errors.hpp"

namespace latiso {

namespace {

void validate(const AnisoModel& model) {
  if (!(model.b >= 1.0)) fail(errc::invalid_argument, "anisotropy ratio must be >= 1");
  if (!(model.range > 0.0)) fail(errc::invalid_argument, "range must be positive");
  if (!(model.sill > 0.0)) fail(errc::invalid_argument, "sill must be positive");
  if (!(model.theta >= 0.0 && model.theta < 3.14159265358979323846))
    fail(errc::invalid_argument, "theta must lie in [0, pi)");
}

int contamination_count(const Grid& grid, const ContaminationSpec& spec) {
  if (!(spec.epsilon >= 0.0 && spec.epsilon < 0.5))
    fail(errc::invalid_argument, "contamination fraction must lie in [0, 0.5)");
  const int count = static_cast<int>(std::ceil(spec.epsilon * grid.size()));
  if (count < 1) fail(errc::invalid_argument, "contamination fraction selects no cell");
  return count;
}

}  // namespace

double spherical_gamma(double dist, double range, double sill) {
  if (dist <= 0.0) return 0.0;
  if (dist >= range) return sill;
  const double u = dist / range;
  return sill * (1.5 * u - 0.5 * u * u * u);
}

double aniso_distance(double dx, double dy, double theta, double b) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double rx = c * dx - s * dy;
  const double ry = s * dx + c * dy;
  const double ty = ry / b;
  return std::sqrt(rx * rx + ty * ty);
}

Matrix grf_covariance(int rows, int cols, const AnisoModel& model, int max_cells) {
  validate(model);
  if (rows < 1 || cols < 1) fail(errc::invalid_argument, "grid dimensions must be positive");
  const long long n = static_cast<long long>(rows) * cols;
  if (n > max_cells)
    fail(errc::size_guard_exceeded,
         "simulation of " + std::to_string(n) + " cells exceeds the guard of " +
             std::to_string(max_cells) + " (raise LATISO_MAX_GRID to override)");
  // cell index i = y * cols + x
  Matrix c(n, n);
  for (long long i = 0; i < n; ++i) {
    const int xi = static_cast<int>(i % cols), yi = static_cast<int>(i / cols);
    c(i, i) = model.sill;
    for (long long j = 0; j < i; ++j) {
      const int xj = static_cast<int>(j % cols), yj = static_cast<int>(j / cols);
      const double dist = aniso_distance(xi - xj, yi - yj, model.theta, model.b);
      const double value = model.sill - spherical_gamma(dist, model.range, model.sill);
      c(i, j) = value;
      c(j, i) = value;
    }
  }
  return c;
}

GrfSampler::GrfSampler(int rows, int cols, const AnisoModel& model, int max_cells)
    : rows_(rows), cols_(cols) {
  Matrix c = grf_covariance(rows, cols, model, max_cells);
  double jitter = 1e-10 * model.sill;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      return;
    }
    c.diagonal().array() += jitter;
    jitter *= 10.0;
  }
  fail(errc::factorization_failed, "covariance factorization failed after jitter retries");
}

Grid GrfSampler::sample(Rng& rng) const {
  const Eigen::Index n = chol_.rows();
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  const Vector field = chol_.triangularView<Eigen::Lower>() * z;
  Grid out(rows_, cols_);
  for (int y = 0; y < rows_; ++y)
    for (int x = 0; x < cols_; ++x) out(x, y) = field[static_cast<Eigen::Index>(y) * cols_ + x];
  return out;
}

Grid simulate_grf(int rows, int cols, const AnisoModel& model, std::uint64_t seed, int max_cells) {
  return GrfSampler(rows, cols, model, max_cells).sample(seed);
}

Grid contaminate_isolated(const Grid& grid, const ContaminationSpec& spec, Rng& rng) {
  if (spec.kind != ContaminationSpec::Kind::isolated)
    fail(errc::invalid_argument, "spec kind is not 'isolated'");
  const int count = contamination_count(grid, spec);
  const int n = grid.size();
  // partial Fisher-Yates over the cell indices
  std::vector<int> cells(static_cast<size_t>(n));
  std::iota(cells.begin(), cells.end(), 0);
  Grid out = grid;
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(cells[static_cast<size_t>(i)], cells[static_cast<size_t>(j)]);
    const int x = cells[static_cast<size_t>(i)] % grid.cols();
    const int y = cells[static_cast<size_t>(i)] / grid.cols();
    out(x, y) = rng.normal(spec.mu0, spec.sigma0);
  }
  return out;
}

Grid contaminate_block(const Grid& grid, const ContaminationSpec& spec, Rng& rng) {
  if (spec.kind != ContaminationSpec::Kind::block)
    fail(errc::invalid_argument, "spec kind is not 'block'");
  const int area = contamination_count(grid, spec);
  if (area > grid.size() / 2)
    fail(errc::block_exceeds_grid, "outlier block would cover more than half the grid");

  // center drawn uniformly over all cells
  const int center = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(grid.size())));
  const int cx = center % grid.cols();
  const int cy = center / grid.cols();

  // rectangle dimensions from the aspect-ratio draw; long side / short
  // side >= ratio by construction (short = floor(sqrt(area / ratio)))
  int w, h;
  if (spec.shape == BlockShape::square) {
    w = h = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(area))));
  } else {
    const double lo = spec.shape == BlockShape::elongated ? 4.0 : 1.0;
    const double hi = 8.0;
    const double ratio = std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
    h = std::max(1, static_cast<int>(std::floor(std::sqrt(area / ratio))));
    w = (area + h - 1) / h;
    if (rng.coin()) std::swap(w, h);  // random orientation
  }
  // fit the grid while preserving the covered-cell count
  w = std::min(w, grid.cols());
  h = std::min(h, grid.rows());
  if (w * h < area) w = std::min(grid.cols(), (area + h - 1) / h);
  if (w * h < area) h = std::min(grid.rows(), (area + w - 1) / w);
  if (w * h < area)
    fail(errc::block_exceeds_grid, "outlier block does not fit the grid");

  // clip the centred rectangle into the grid, extending toward the interior
  const int x0 = std::clamp(cx - (w - 1) / 2, 0, grid.cols() - w);
  const int y0 = std::clamp(cy - (h - 1) / 2, 0, grid.rows() - h);

  Grid out = grid;
  int placed = 0;
  for (int y = y0; y < y0 + h && placed < area; ++y)
    for (int x = x0; x < x0 + w && placed < area; ++x) {
      out(x, y) = rng.normal(spec.mu0, spec.sigma0);
      ++placed;
    }
  return out;
}

Grid contaminate(const Grid& grid, const ContaminationSpec& spec, Rng& rng) {
  return spec.kind == ContaminationSpec::Kind::isolated ? contaminate_isolated(grid, spec, rng)
                                                        : contaminate_block(grid, spec, rng);
}

}  // namespace latiso
