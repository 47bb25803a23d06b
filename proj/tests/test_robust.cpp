#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "latiso/errors.hpp"
#include "latiso/robust.hpp"
#include "latiso/rng.hpp"

using namespace latiso;

namespace {

// Independent Qn oracle: fully sort the pairwise gaps and pick the k-th.
double qn_oracle(const Vector& x) {
  const Eigen::Index n = x.size();
  std::vector<double> gaps;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) gaps.push_back(std::fabs(x[i] - x[j]));
  std::sort(gaps.begin(), gaps.end());
  const long long half = n / 2;
  const long long k = (half + 1) * half / 2;
  return 2.2219 * qn_finite_sample_factor(static_cast<int>(n)) * gaps[static_cast<size_t>(k - 1)];
}

Matrix subset_cov(const Matrix& x, const std::vector<int>& subset) {
  const Eigen::Index p = x.cols();
  Vector mean = Vector::Zero(p);
  for (int i : subset) mean += x.row(i).transpose();
  mean /= static_cast<double>(subset.size());
  Matrix cov = Matrix::Zero(p, p);
  for (int i : subset) {
    const Vector d = x.row(i).transpose() - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(subset.size() - 1);
}

// Exhaustive minimum-determinant oracle over all k-subsets.
std::vector<int> mcd_oracle_support(const Matrix& x, int k) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> comb(static_cast<size_t>(k));
  std::iota(comb.begin(), comb.end(), 0);
  std::vector<int> best;
  double best_det = std::numeric_limits<double>::infinity();
  while (true) {
    const double det = subset_cov(x, comb).determinant();
    if (det > 0.0 && det < best_det) {
      best_det = det;
      best = comb;
    }
    int i = k - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
  }
  return best;
}

Matrix random_matrix(int n, int p, Rng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("median and mad") {
  Vector x(5);
  x << 1, 2, 3, 4, 5;
  CHECK(median(x) == 3.0);
  CHECK(mad(x) == doctest::Approx(1.4826).epsilon(1e-14));

  Vector even(4);
  even << 4, 1, 3, 2;
  CHECK(median(even) == 2.5);

  CHECK(mad(Vector::Constant(7, 2.5)) == 0.0);
}

TEST_CASE("mad is consistent at the normal distribution") {
  Rng rng(123);
  Vector x(100000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  CHECK(mad(x) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("qn_scale basics") {
  CHECK(qn_scale(Vector::Constant(10, 3.0)) == 0.0);
  CHECK_THROWS_AS(qn_scale(Vector::Constant(1, 3.0)), error);

  // n = 5 uses the third-smallest gap: with four equal values it is 0
  Vector contaminated(5);
  contaminated << 0, 0, 0, 0, 10;
  CHECK(qn_scale(contaminated) == 0.0);
}

TEST_CASE("qn_scale matches the sorted-oracle exactly") {
  Rng rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_below(199));
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal();
    CHECK(qn_scale(x) == qn_oracle(x));
  }
}

TEST_CASE("qn_scale affine equivariance") {
  Rng rng(5);
  Vector x(40);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  const double base = qn_scale(x);
  // power-of-two scaling is exact in floating point
  CHECK(qn_scale((-8.0 * x).eval()) == 8.0 * base);
  const Vector shifted = x.array() + 3.75;
  CHECK(qn_scale(shifted) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("qn_scale is consistent at the normal distribution") {
  Rng rng(2024);
  Vector x(20000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  CHECK(qn_scale(x) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("univariate MCD excludes the outlier") {
  Matrix x(5, 1);
  x << 0.0, 0.1, -0.1, 0.05, 100.0;
  Rng rng(1);
  const McdResult fit = mcd_raw(x, 3, rng);
  REQUIRE(fit.raw_support.size() == 3);
  CHECK(std::find(fit.raw_support.begin(), fit.raw_support.end(), 4) == fit.raw_support.end());
  CHECK(fit.raw_support == mcd_oracle_support(x, 3));
}

TEST_CASE("raw MCD equals the exhaustive minimum for small samples") {
  Rng rng(77);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 1 + static_cast<int>(rng.uniform_below(2));
    const int n = p + 3 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(12 - p - 2)));
    const Matrix x = random_matrix(n, p, rng);
    const int k = mcd_default_k(n, p);
    Rng fit_rng(rep);
    CHECK(mcd_raw(x, k, fit_rng).raw_support == mcd_oracle_support(x, k));
  }
}

TEST_CASE("k = n gives the classical estimate with factor 1") {
  Rng rng(8);
  const Matrix x = random_matrix(30, 2, rng);
  Rng fit_rng(0);
  const McdResult fit = mcd_raw(x, 30, fit_rng);
  CHECK(fit.correction == 1.0);
  const Vector mean = x.colwise().mean();
  CHECK((fit.location - mean).norm() == doctest::Approx(0.0).epsilon(1e-14));
  std::vector<int> all(30);
  std::iota(all.begin(), all.end(), 0);
  CHECK((fit.scatter - subset_cov(x, all)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("mcd_raw validates its inputs") {
  Rng rng(0);
  Matrix x = random_matrix(10, 2, rng);
  Rng r1(0);
  CHECK_THROWS_AS(mcd_raw(x, 5, r1), error);   // below floor((n+p+1)/2) = 6
  CHECK_THROWS_AS(mcd_raw(x, 11, r1), error);  // above n
  Matrix tiny = random_matrix(2, 2, rng);
  CHECK_THROWS_AS(mcd_raw(tiny, 2, r1), error);  // n <= p
}

TEST_CASE("c_step properties") {
  Rng rng(21);
  const Matrix x = random_matrix(60, 2, rng);
  const int k = 35;

  for (int rep = 0; rep < 100; ++rep) {
    // random starting subset of size k
    std::vector<int> idx(60);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i)
      std::swap(idx[static_cast<size_t>(i)],
                idx[static_cast<size_t>(i) + rng.uniform_below(static_cast<std::uint64_t>(60 - i))]);
    std::vector<int> subset(idx.begin(), idx.begin() + k);
    std::sort(subset.begin(), subset.end());

    const std::vector<int> next = c_step(x, subset);
    CHECK(subset_cov(x, next).determinant() <=
          subset_cov(x, subset).determinant() * (1.0 + 1e-12));
  }

  // a converged subset is a fixed point
  Rng fit_rng(3);
  const McdResult fit = mcd_raw(x, k, fit_rng);
  CHECK(c_step(x, fit.raw_support) == fit.raw_support);
}

TEST_CASE("c_step with p = 1 keeps the points closest to the subset mean") {
  Matrix x(6, 1);
  x << 0.0, 1.0, 2.0, 3.0, 10.0, 11.0;
  const std::vector<int> subset{0, 1, 4, 5};
  // subset mean 5.5, sigma large; closest 4 points to 5.5 are 2,3,10,(1 or 11)
  const std::vector<int> next = c_step(x, subset);
  Vector dist(6);
  const double mean = (0.0 + 1.0 + 10.0 + 11.0) / 4.0;
  for (int i = 0; i < 6; ++i) dist[i] = std::fabs(x(i, 0) - mean);
  std::vector<int> expected(6);
  std::iota(expected.begin(), expected.end(), 0);
  std::sort(expected.begin(), expected.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  expected.resize(4);
  std::sort(expected.begin(), expected.end());
  CHECK(next == expected);
}

TEST_CASE("reweighted MCD on clean data is close to the truth") {
  Rng rng(31415);
  Matrix mean_scatter = Matrix::Zero(2, 2);
  double mean_location = 0.0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    const Matrix x = random_matrix(500, 2, rng);
    Rng fit_rng(static_cast<std::uint64_t>(rep));
    const McdResult fit = mcd_reweighted(x, mcd_default_k(500, 2), fit_rng);
    mean_scatter += fit.scatter / reps;
    mean_location += fit.location.norm() / reps;
  }
  CHECK(std::fabs(mean_scatter(0, 0) - 1.0) < 0.15);
  CHECK(std::fabs(mean_scatter(1, 1) - 1.0) < 0.15);
  CHECK(std::fabs(mean_scatter(0, 1)) < 0.15);
  CHECK(mean_location < 0.2);
}

TEST_CASE("reweighted MCD zero-weights the outlier") {
  Matrix x(5, 1);
  x << 0.0, 0.1, -0.1, 0.05, 100.0;
  Rng rng(2);
  const McdResult fit = mcd_reweighted(x, 3, rng);
  CHECK(fit.weights[4] == 0);
  CHECK(fit.weights.sum() >= 2);
}

TEST_CASE("all-weights-one reduces to the classical covariance times c1") {
  // a sample with no point beyond the 0.975 cutoff
  Matrix x(8, 1);
  x << -1.0, -0.6, -0.3, -0.1, 0.1, 0.3, 0.6, 1.0;
  Rng rng(4);
  const McdResult fit = mcd_reweighted(x, mcd_default_k(8, 1), rng);
  if (fit.weights.sum() == 8) {
    std::vector<int> all(8);
    std::iota(all.begin(), all.end(), 0);
    const double classical = subset_cov(x, all)(0, 0);
    CHECK(fit.scatter(0, 0) == doctest::Approx(classical * fit.correction).epsilon(1e-12));
  } else {
    FAIL("expected every point to receive weight 1");
  }
}

TEST_CASE("MCD equivariance under affine maps with a fixed seed") {
  Rng rng(55);
  const Matrix x = random_matrix(80, 2, rng);
  Matrix a(2, 2);
  a << 2.0, 0.5, -0.25, 4.0;
  const Vector b = Vector::Constant(2, 1.5);
  const Matrix y = (x * a.transpose()).rowwise() + b.transpose();

  Rng r1(10), r2(10);
  const McdResult fx = mcd_reweighted(x, 45, r1);
  const McdResult fy = mcd_reweighted(y, 45, r2);
  CHECK(((a * fx.location + b) - fy.location).norm() < 1e-8);
  CHECK((a * fx.scatter * a.transpose() - fy.scatter).norm() < 1e-7);
}

TEST_CASE("MCD is deterministic for a fixed seed") {
  Rng data_rng(200);
  const Matrix x = random_matrix(120, 3, data_rng);
  Rng r1(42), r2(42);
  const McdResult f1 = mcd_reweighted(x, mcd_default_k(120, 3), r1);
  const McdResult f2 = mcd_reweighted(x, mcd_default_k(120, 3), r2);
  CHECK(f1.raw_support == f2.raw_support);
  CHECK((f1.scatter - f2.scatter).norm() == 0.0);
}

TEST_CASE("singular samples are reported") {
  Matrix x = Matrix::Zero(10, 1);
  Rng rng(0);
  CHECK_THROWS_AS(mcd_raw(x, 6, rng), error);

  // half the sample identical: the minimizing subset has zero variance
  Matrix half(8, 1);
  half << 1, 1, 1, 1, 1, 2, 3, 4;
  CHECK_THROWS_AS(mcd_raw(half, 5, rng), error);
}
