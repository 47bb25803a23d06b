#pragma once

#include "latiso/grid.hpp"
#include "latiso/rng.hpp"

namespace latiso {

/// Geometric anisotropy model: the field becomes isotropic after rotating
/// the axes by theta and shrinking the second coordinate by 1/b. theta in
/// [0, pi), ratio b >= 1, spherical variogram with range r and sill beta.
struct AnisoModel {
  double theta = 0.0;
  double b = 1.0;
  double range = 5.0;
  double sill = 1.0;
};

/// Spherical semivariogram: sill * (3d/(2r) - d^3/(2r^3)) inside the
/// range, sill beyond it, 0 at distance 0.
double spherical_gamma(double dist, double range, double sill);

/// Anisotropy-adjusted distance ||T R h|| with R the rotation by theta and
/// T = diag(1, 1/b).
double aniso_distance(double dx, double dy, double theta, double b);
inline double aniso_distance(Lag h, double theta, double b) {
  return aniso_distance(h.dx, h.dy, theta, b);
}

/// Default guard against accidentally huge dense covariance matrices.
constexpr int kDefaultMaxGridCells = 4096;

/// Dense covariance of the field on a rows-by-cols lattice:
/// C(s_i, s_j) = sill - gamma(aniso_distance(s_i - s_j)).
Matrix grf_covariance(int rows, int cols, const AnisoModel& model,
                      int max_cells = kDefaultMaxGridCells);

/// Gaussian random field sampler. Factorizes the covariance once
/// (escalating diagonal jitter on failure) and then draws mean-zero fields.
class GrfSampler {
 public:
  GrfSampler(int rows, int cols, const AnisoModel& model, int max_cells = kDefaultMaxGridCells);

  Grid sample(Rng& rng) const;
  Grid sample(std::uint64_t seed) const {
    Rng rng(seed);
    return sample(rng);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
  Matrix chol_;  // lower triangular factor
};

Grid simulate_grf(int rows, int cols, const AnisoModel& model, std::uint64_t seed,
                  int max_cells = kDefaultMaxGridCells);

enum class BlockShape { random_shape, square, elongated };

/// Substitutive contamination: outliers replace the field value and follow
/// N(mu0, sigma0^2).
struct ContaminationSpec {
  enum class Kind { isolated, block };
  Kind kind = Kind::isolated;
  double epsilon = 0.1;  // fraction of contaminated cells, in [0, 0.5)
  double mu0 = 0.0;
  double sigma0 = 1.0;
  BlockShape shape = BlockShape::random_shape;
};

/// Replaces ceil(epsilon * n) cells at distinct uniformly chosen positions.
Grid contaminate_isolated(const Grid& grid, const ContaminationSpec& spec, Rng& rng);

/// Replaces a contiguous rectangle of ceil(epsilon * n) cells centred (as
/// far as the boundary allows) at a uniformly chosen cell. Aspect ratio:
/// 1 for square, log-uniform in [4, 8] for elongated, [1, 8] for random.
Grid contaminate_block(const Grid& grid, const ContaminationSpec& spec, Rng& rng);

Grid contaminate(const Grid& grid, const ContaminationSpec& spec, Rng& rng);

}  // namespace latiso
