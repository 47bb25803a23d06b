#pragma once

#include <cstdint>
#include <string>

#include "latiso/grid.hpp"
#include "latiso/resampling.hpp"
#include "latiso/variogram.hpp"

namespace latiso {

/// Full-rank contrast matrix comparing variogram values at equal-norm
/// lags: each row has one +1 and one -1 inside one equal-norm group.
struct ContrastMatrix {
  Matrix rows;  // d x |lags|, entries in {-1, 0, 1}
  int d = 0;    // rank
};

/// Pairs consecutive members of each equal-norm group (first minus second,
/// third minus fourth, ...), deterministic in the lag-set order. Signals
/// no-testable-contrasts when every group is a singleton.
ContrastMatrix build_contrasts(const LagSet& lam);

/// Adds 10% of the average variance to the diagonal, but only when the
/// matrix is ill-conditioned (condition number above 1e10) or not positive
/// definite. `fired` reports whether the adjustment was applied. Signals
/// irreparable when the trace is non-positive and the matrix is singular.
Matrix regularize(const Matrix& m, bool* fired = nullptr);

/// Quadratic-form statistic n_eff * (A g)^T (A sigma A^T)^{-1} (A g), with
/// the inner matrix regularized on demand.
double test_statistic(const Vector& g, const Matrix& sigma, const ContrastMatrix& a,
                      double n_eff, bool* regularized = nullptr);

/// Upper chi-squared tail of the statistic with d degrees of freedom.
double asymptotic_pvalue(double ts, int d);

enum class Method { subsampling, permutation };

const char* method_name(Method m) noexcept;

struct TestConfig {
  Estimator estimator = Estimator::matheron;
  int window_side = 0;   // 0 = round(sqrt(min side))
  int block_side = 0;    // 0 = preset (6 at 24, 8 at 40, else round(side/4))
  int B = 1000;
  bool robust_covariance = true;  // MCD instead of the moment covariance
  bool add_one_pvalue = false;    // (1 + count) / (B + 1) instead of count / B
  bool mcd_correction = true;
  int mcd_k = -1;
  int workers = 1;
};

/// Which covariance actually entered the statistic; the robust estimate
/// can fall back when the scatter is degenerate.
enum class CovarianceRoute { mcd, moment, moment_fallback, identity_fallback };

struct Diagnostics {
  bool regularized = false;
  CovarianceRoute covariance = CovarianceRoute::mcd;
  int dropped_windows = 0;
  int k_n = 0;             // windows (subsampling) or B (permutation)
  double f_n = 0.0;        // subsampling only
  double n_eff = 0.0;
  bool degenerate_estimates = false;
  std::string warning;
};

struct TestResult {
  double statistic = 0.0;
  int d = 0;
  double p_asymptotic = 1.0;
  double p_resampling = 1.0;
  Method method = Method::subsampling;
  Estimator estimator = Estimator::matheron;
  LagSet lam;
  VariogramVector estimates;
  std::uint64_t seed = 0;
  Diagnostics diagnostics;
};

int default_block_side(int side);

/// Subsampling route: covariance and the p-value reference distribution
/// both come from the overlapping-window ensemble; the full-grid statistic
/// uses the joint (edge-corrected) restriction and n_eff = |D_n|.
TestResult subsampling_test(const Grid& grid, const LagSet& lam, const TestConfig& config,
                            std::uint64_t seed);

/// Block-permutation route: B randomly block-rotated copies, all estimates
/// under the within-blocks restriction, one shared covariance from the
/// permuted vectors.
TestResult permutation_test(const Grid& grid, const LagSet& lam, const TestConfig& config,
                            std::uint64_t seed);

TestResult run_test(const Grid& grid, const LagSet& lam, Method method, const TestConfig& config,
                    std::uint64_t seed);

}  // namespace latiso
