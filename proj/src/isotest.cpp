#include "latiso/isotest.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "latiso/chi_squared.hpp"
#include "latiso/errors.hpp"
#include "latiso/robust.hpp"

namespace latiso {

const char* method_name(Method m) noexcept {
  return m == Method::subsampling ? "subsampling" : "permutation";
}

ContrastMatrix build_contrasts(const LagSet& lam) {
  int d = 0;
  for (const auto& group : lam.groups) d += static_cast<int>(group.size()) / 2;
  if (d == 0)
    fail(errc::no_testable_contrasts, "every equal-norm group has a single lag");
  ContrastMatrix a;
  a.rows = Matrix::Zero(d, lam.size());
  int row = 0;
  for (const auto& group : lam.groups)
    for (size_t j = 0; j + 1 < group.size(); j += 2) {
      a.rows(row, group[j]) = 1.0;
      a.rows(row, group[j + 1]) = -1.0;
      ++row;
    }
  // recompute the rank rather than assuming it
  a.d = static_cast<int>(Eigen::FullPivLU<Matrix>(a.rows).rank());
  return a;
}

namespace {

constexpr double kConditionLimit = 1e10;

bool needs_regularization(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi)) return true;
  return hi / lo > kConditionLimit;
}

}  // namespace

Matrix regularize(const Matrix& m, bool* fired) {
  if (m.rows() != m.cols()) fail(errc::invalid_argument, "matrix must be square");
  if (fired) *fired = false;
  if (!needs_regularization(m)) return m;
  const double trace = m.trace();
  const Eigen::Index d = m.rows();
  if (!(trace > 0.0))
    fail(errc::irreparable_covariance, "singular matrix with non-positive trace");
  Matrix out = m;
  out.diagonal().array() += 0.1 * trace / static_cast<double>(d);
  if (needs_regularization(out))
    fail(errc::irreparable_covariance, "matrix remains singular after regularization");
  if (fired) *fired = true;
  return out;
}

double test_statistic(const Vector& g, const Matrix& sigma, const ContrastMatrix& a,
                      double n_eff, bool* regularized) {
  if (sigma.rows() != g.size() || sigma.cols() != g.size() || a.rows.cols() != g.size())
    fail(errc::invalid_argument, "dimension mismatch in test statistic");
  const Vector contrasts = a.rows * g;
  const Matrix inner = regularize(a.rows * sigma * a.rows.transpose(), regularized);
  const Vector solved = inner.ldlt().solve(contrasts);
  const double ts = n_eff * contrasts.dot(solved);
  return std::max(ts, 0.0);
}

double asymptotic_pvalue(double ts, int d) {
  if (ts < 0.0) fail(errc::invalid_argument, "test statistic must be non-negative");
  return 1.0 - chi_sq_cdf(ts, d);
}

int default_block_side(int side) {
  if (side == 24) return 6;
  if (side == 40) return 8;
  return std::max(2L, std::lround(side / 4.0));
}

namespace {

/// Shared covariance assembly: try the robust route, fall back to the
/// moment covariance when the scatter is degenerate, and, for permutation
/// ensembles whose vectors are all identical, to the identity (any
/// positive-definite matrix gives the same p-value by symmetry).
struct CovarianceChoice {
  Matrix sigma;
  CovarianceRoute route;
};

Matrix moment_covariance(const std::vector<VariogramVector>& vectors, double scale) {
  const int n = static_cast<int>(vectors.size());
  const int p = vectors.front().lam.size();
  Matrix g(n, p);
  for (int i = 0; i < n; ++i) g.row(i) = vectors[static_cast<size_t>(i)].estimates.transpose();
  const Vector mean = g.colwise().mean();
  Matrix sigma = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const Vector d = g.row(i).transpose() - mean;
    sigma.noalias() += d * d.transpose();
  }
  sigma *= scale / n;
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace

TestResult subsampling_test(const Grid& grid, const LagSet& lam, const TestConfig& config,
                            std::uint64_t seed) {
  Rng rng(seed);
  const int side = std::min(grid.rows(), grid.cols());
  const int l = config.window_side > 0 ? config.window_side : default_window_side(side);

  VariogramOptions vario;
  vario.mcd_correction = config.mcd_correction;
  vario.mcd_k = config.mcd_k;

  Rng ensemble_rng = rng.child(1);
  const SubsampleEnsemble ensemble =
      subsample_ensemble(grid, lam, config.estimator, l, ensemble_rng, vario);

  TestResult result;
  result.method = Method::subsampling;
  result.estimator = config.estimator;
  result.lam = lam;
  result.seed = seed;
  result.diagnostics.dropped_windows = ensemble.dropped_windows;
  result.diagnostics.k_n = ensemble.k_n;
  result.diagnostics.f_n = ensemble.f_n;
  result.diagnostics.n_eff = ensemble.grid_observed;

  CovarianceChoice cov;
  Rng cov_rng = rng.child(2);
  if (config.robust_covariance) {
    try {
      cov = {subsampling_covariance(ensemble, true, cov_rng).sigma, CovarianceRoute::mcd};
    } catch (const error& e) {
      if (e.code() != errc::singular_scatter && e.code() != errc::too_few_weighted) throw;
      cov = {subsampling_covariance(ensemble, false, cov_rng).sigma,
             CovarianceRoute::moment_fallback};
    }
  } else {
    cov = {subsampling_covariance(ensemble, false, cov_rng).sigma, CovarianceRoute::moment};
  }
  result.diagnostics.covariance = cov.route;

  Rng estimate_rng = rng.child(3);
  result.estimates = estimate_vector(grid, lam, config.estimator, Restriction::joint, nullptr,
                                     &estimate_rng, vario);
  result.diagnostics.degenerate_estimates = result.estimates.degenerate;

  const ContrastMatrix a = build_contrasts(lam);
  result.d = a.d;
  result.statistic = test_statistic(result.estimates.estimates, cov.sigma, a,
                                    ensemble.grid_observed, &result.diagnostics.regularized);
  result.p_asymptotic = asymptotic_pvalue(result.statistic, a.d);

  // Reference distribution: the same statistic on every window, with the
  // window's own estimate and effective size against the shared covariance.
  int at_least = 0;
  for (const SubsampleWindow& w : ensemble.windows) {
    bool fired = false;
    const double ts_i =
        test_statistic(w.vario.estimates, cov.sigma, a, w.effective_size, &fired);
    result.diagnostics.regularized = result.diagnostics.regularized || fired;
    if (ts_i >= result.statistic) ++at_least;
  }
  result.p_resampling = static_cast<double>(at_least) / ensemble.k_n;
  return result;
}

TestResult permutation_test(const Grid& grid, const LagSet& lam, const TestConfig& config,
                            std::uint64_t seed) {
  Rng rng(seed);
  const int side = std::min(grid.rows(), grid.cols());
  const int block_side = config.block_side > 0 ? config.block_side : default_block_side(side);
  const std::vector<Block> blocks = partition_blocks(grid, block_side);

  VariogramOptions vario;
  vario.mcd_correction = config.mcd_correction;
  vario.mcd_k = config.mcd_k;

  Rng ensemble_rng = rng.child(1);
  const PermutationEnsemble ensemble = permutation_ensemble(
      grid, lam, config.estimator, blocks, config.B, ensemble_rng, config.workers, vario);

  TestResult result;
  result.method = Method::permutation;
  result.estimator = config.estimator;
  result.lam = lam;
  result.seed = seed;
  result.diagnostics.k_n = ensemble.B;
  result.diagnostics.n_eff = ensemble.n_eff;
  result.estimates = ensemble.original;
  result.diagnostics.degenerate_estimates = ensemble.original.degenerate;
  if (config.estimator == Estimator::mcd_diff && lam.lags == lambda3().lags)
    result.diagnostics.warning =
        "MCD.diff with the eight-lag set and block permutation is known to be very "
        "conservative (small type-I error, substantial loss of power)";

  CovarianceChoice cov;
  Rng cov_rng = rng.child(2);
  try {
    cov = {permutation_covariance(ensemble, cov_rng).sigma, CovarianceRoute::mcd};
  } catch (const error& e) {
    if (e.code() != errc::singular_scatter && e.code() != errc::too_few_weighted) throw;
    Matrix moment = moment_covariance(ensemble.vectors, ensemble.n_eff);
    if (moment.trace() > 0.0) {
      cov = {std::move(moment), CovarianceRoute::moment_fallback};
    } else {
      // every permuted vector identical: any positive-definite matrix
      // yields the same comparisons
      cov = {Matrix::Identity(lam.size(), lam.size()), CovarianceRoute::identity_fallback};
    }
  }
  result.diagnostics.covariance = cov.route;

  const ContrastMatrix a = build_contrasts(lam);
  result.d = a.d;
  result.statistic = test_statistic(ensemble.original.estimates, cov.sigma, a, ensemble.n_eff,
                                    &result.diagnostics.regularized);
  result.p_asymptotic = asymptotic_pvalue(result.statistic, a.d);

  int at_least = 0;
  for (const VariogramVector& v : ensemble.vectors) {
    bool fired = false;
    const double ts_b = test_statistic(v.estimates, cov.sigma, a, ensemble.n_eff, &fired);
    result.diagnostics.regularized = result.diagnostics.regularized || fired;
    if (ts_b >= result.statistic) ++at_least;
  }
  result.p_resampling = config.add_one_pvalue
                            ? static_cast<double>(1 + at_least) / (ensemble.B + 1)
                            : static_cast<double>(at_least) / ensemble.B;
  return result;
}

TestResult run_test(const Grid& grid, const LagSet& lam, Method method, const TestConfig& config,
                    std::uint64_t seed) {
  return method == Method::subsampling ? subsampling_test(grid, lam, config, seed)
                                       : permutation_test(grid, lam, config, seed);
}

}  // namespace latiso
