#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

#include "doctest.h"
#include "latiso/errors.hpp"
#include "latiso/simulate.hpp"
#include "latiso/variogram.hpp"

using namespace latiso;

TEST_CASE("spherical variogram values") {
  CHECK(spherical_gamma(0.0, 5.0, 1.0) == 0.0);
  CHECK(spherical_gamma(5.0, 5.0, 1.0) == 1.0);
  CHECK(spherical_gamma(9.0, 5.0, 1.0) == 1.0);
  CHECK(spherical_gamma(2.5, 5.0, 1.0) == doctest::Approx(0.6875).epsilon(1e-15));
  CHECK(spherical_gamma(1.0, 2.0, 3.0) == doctest::Approx(3.0 * (0.75 - 0.0625)).epsilon(1e-15));
}

TEST_CASE("anisotropy-adjusted distance") {
  CHECK(aniso_distance(Lag{3, 4}, 0.0, 1.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(aniso_distance(Lag{1, 1}, 3.14159265358979323846 / 4.0, 2.0) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(aniso_distance(Lag{0, 1}, 0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));

  // with ratio 1 the transform is a pure rotation for any angle
  for (double theta : {0.0, 0.3, 1.1, 2.9}) {
    CHECK(aniso_distance(Lag{2, -3}, theta, 1.0) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
  }
  // invariant under negation of the lag
  CHECK(aniso_distance(Lag{2, 1}, 0.7, 1.7) == doctest::Approx(aniso_distance(Lag{-2, -1}, 0.7, 1.7)).epsilon(1e-15));
}

TEST_CASE("covariance matrix structure") {
  const AnisoModel model{0.0, 1.0, 3.0, 2.0};
  const Matrix c = grf_covariance(4, 5, model);
  REQUIRE(c.rows() == 20);
  for (int i = 0; i < 20; ++i) CHECK(c(i, i) == 2.0);
  // cells (0,0) and (4,3) are more than the range apart
  CHECK(c(0, 19) == 0.0);
  CHECK((c - c.transpose()).norm() == 0.0);
}

TEST_CASE("covariance matrix is positive semi-definite for all tested models") {
  for (const AnisoModel& model :
       {AnisoModel{0.0, 1.0, 5.0, 1.0}, AnisoModel{0.0, 2.0, 5.0, 1.0},
        AnisoModel{3.14159265358979323846 / 4.0, 2.0, 8.0, 1.0},
        AnisoModel{3.14159265358979323846 / 4.0, std::sqrt(2.0), 2.0, 1.0}}) {
    const Matrix c = grf_covariance(12, 12, model);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * model.sill);
  }
}

TEST_CASE("size guard") {
  CHECK_THROWS_AS(grf_covariance(80, 80, AnisoModel{}), error);
  CHECK_NOTHROW(grf_covariance(80, 80, AnisoModel{}, 6400));
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(grf_covariance(4, 4, AnisoModel{0.0, 0.5, 5.0, 1.0}), error);
  CHECK_THROWS_AS(grf_covariance(4, 4, AnisoModel{0.0, 1.0, -1.0, 1.0}), error);
  CHECK_THROWS_AS(grf_covariance(4, 4, AnisoModel{4.0, 1.0, 5.0, 1.0}), error);
}

TEST_CASE("fixed seed reproduces the field bit for bit") {
  const AnisoModel model{0.0, 2.0, 5.0, 1.0};
  const Grid a = simulate_grf(10, 10, model, 424242);
  const Grid b = simulate_grf(10, 10, model, 424242);
  CHECK(a == b);
  const Grid c = simulate_grf(10, 10, model, 424243);
  CHECK(!(a == c));
}

TEST_CASE("nugget limit: tiny range gives independent cells") {
  const AnisoModel model{0.0, 1.0, 1e-6, 1.0};
  const GrfSampler sampler(16, 16, model);
  double total = 0.0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    const Grid g = sampler.sample(static_cast<std::uint64_t>(rep) + 1);
    total += matheron(g, {1, 0}, pair_set(g, {1, 0})).first;
  }
  CHECK(total / reps == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("isotropic model gives matching axial variograms") {
  const AnisoModel model{0.0, 1.0, 5.0, 1.0};
  const GrfSampler sampler(24, 24, model);
  double ew = 0.0, sn = 0.0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    const Grid g = sampler.sample(static_cast<std::uint64_t>(rep) + 1);
    ew += matheron(g, {1, 0}, pair_set(g, {1, 0})).first;
    sn += matheron(g, {0, 1}, pair_set(g, {0, 1})).first;
  }
  CHECK(std::fabs(ew - sn) / std::max(ew, sn) < 0.05);
}

TEST_CASE("anisotropic model separates the axes") {
  // theta = 0, b = 2 stretches the dependence along the y axis, so the
  // south-north variogram at lag 1 sits below the east-west one
  // (true values 2*gamma = 0.299 vs 0.592 at r = 5)
  const AnisoModel model{0.0, 2.0, 5.0, 1.0};
  const GrfSampler sampler(24, 24, model);
  double ew = 0.0, sn = 0.0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    const Grid g = sampler.sample(static_cast<std::uint64_t>(rep) + 1);
    ew += matheron(g, {1, 0}, pair_set(g, {1, 0})).first;
    sn += matheron(g, {0, 1}, pair_set(g, {0, 1})).first;
  }
  CHECK(ew > 1.3 * sn);
  CHECK(ew / reps == doctest::Approx(0.592).epsilon(0.15));
  CHECK(sn / reps == doctest::Approx(0.299).epsilon(0.15));
}

TEST_CASE("isolated contamination replaces the exact cell count") {
  const Grid g(24, 24, 0.0);
  ContaminationSpec spec;
  spec.kind = ContaminationSpec::Kind::isolated;
  spec.epsilon = 0.1;
  spec.mu0 = 5.0;
  spec.sigma0 = 1.0;
  Rng rng(7);
  const Grid out = contaminate_isolated(g, spec, rng);
  CHECK(out.rows() == 24);
  CHECK(out.cols() == 24);
  int changed = 0;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      if (out(x, y) != 0.0) ++changed;
  CHECK(changed == 58);  // ceil(0.1 * 576)
}

TEST_CASE("single-cell contamination") {
  const Grid g(10, 10, 0.0);
  ContaminationSpec spec;
  spec.kind = ContaminationSpec::Kind::isolated;
  spec.epsilon = 0.01;  // ceil(1) = 1 outlier
  spec.mu0 = 9.0;
  Rng rng(3);
  const Grid out = contaminate_isolated(g, spec, rng);
  int changed = 0;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x)
      if (out(x, y) != 0.0) ++changed;
  CHECK(changed == 1);
}

TEST_CASE("square block contamination of 64 cells is an 8x8 square") {
  const Grid g(24, 24, 0.0);
  ContaminationSpec spec;
  spec.kind = ContaminationSpec::Kind::block;
  spec.epsilon = 64.0 / 576.0;
  spec.mu0 = 100.0;
  spec.sigma0 = 0.001;
  spec.shape = BlockShape::square;
  Rng rng(5);
  const Grid out = contaminate_block(g, spec, rng);
  std::set<int> xs, ys;
  int changed = 0;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      if (out(x, y) != 0.0) {
        ++changed;
        xs.insert(x);
        ys.insert(y);
      }
  CHECK(changed == 64);
  CHECK(xs.size() == 8);
  CHECK(ys.size() == 8);
}

TEST_CASE("block contamination covers the exact cell count and stays contiguous") {
  const Grid g(24, 24, 0.0);
  for (const BlockShape shape : {BlockShape::random_shape, BlockShape::elongated}) {
    for (int seed = 0; seed < 20; ++seed) {
      ContaminationSpec spec;
      spec.kind = ContaminationSpec::Kind::block;
      spec.epsilon = 0.2;
      spec.mu0 = 0.0;
      spec.sigma0 = 5.0;
      spec.shape = shape;
      Rng rng(static_cast<std::uint64_t>(seed));
      const Grid out = contaminate_block(g, spec, rng);
      std::set<int> xs, ys;
      int changed = 0;
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x)
          if (out(x, y) != 0.0) {
            ++changed;
            xs.insert(x);
            ys.insert(y);
          }
      CHECK(changed == 116);  // ceil(0.2 * 576)
      if (shape == BlockShape::elongated) {
        const double long_side = std::max(xs.size(), ys.size());
        const double short_side = std::min(xs.size(), ys.size());
        CHECK(long_side / short_side >= 4.0);
      }
    }
  }
}

TEST_CASE("block contamination rejects huge fractions") {
  const Grid g(10, 10, 0.0);
  ContaminationSpec spec;
  spec.kind = ContaminationSpec::Kind::block;
  spec.epsilon = 0.49;
  Rng rng(1);
  CHECK_NOTHROW(contaminate_block(g, spec, rng));
  spec.epsilon = 0.51;
  CHECK_THROWS_AS(contaminate_block(g, spec, rng), error);
}