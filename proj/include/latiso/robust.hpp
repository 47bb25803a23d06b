#pragma once

#include <Eigen/Dense>

#include <vector>

#include "latiso/rng.hpp"

namespace latiso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Median with midpoint convention for even lengths.
double median(Eigen::Ref<const Vector> x);

/// Median absolute deviation about the median, scaled by 1.4826 for
/// consistency at the normal distribution.
double mad(Eigen::Ref<const Vector> x);

/// Qn scale: the k-th order statistic of the pairwise absolute
/// differences |x_i - x_j|, i < j, with k = C(floor(n/2) + 1, 2), scaled
/// by the large-sample factor 2.2219 and a finite-sample correction.
/// Computed by the plain pairwise scan. Requires n >= 2.
// TODO: switch to the O(n log n) selection algorithm if grids much larger
// than 64x64 become a use case.
double qn_scale(Eigen::Ref<const Vector> x);

/// Finite-sample correction factor used inside qn_scale; exposed for tests.
double qn_finite_sample_factor(int n);

/// Result of the minimum covariance determinant estimator on an n-by-p
/// sample. `scatter` carries the consistency factor recorded in
/// `correction`; after reweighting it is the covariance of the weight-1
/// points times the reweighting factor.
struct McdResult {
  Vector location;
  Matrix scatter;
  std::vector<int> raw_support;  // ascending indices, size k
  Eigen::VectorXi weights;       // 0/1, length n (reweighted stage; raw stage: support indicator)
  double correction = 1.0;
};

struct McdOptions {
  int n_starts = 500;        // random (p+1)-subsets tried by the concentration search
  int n_refine = 10;         // best candidates iterated to convergence
  int exhaustive_max_n = 20; // below this, enumerate all k-subsets (p >= 2)
};

/// One concentration step: given a size-k subset with invertible
/// covariance, returns the k points with smallest squared Mahalanobis
/// distance to the subset mean/covariance. Never increases the
/// covariance determinant.
std::vector<int> c_step(const Matrix& x, const std::vector<int>& subset);

/// Raw MCD: the best-found size-k subset minimizing the determinant of its
/// sample covariance. Exact for p = 1 (sorted contiguous window) and for
/// n <= exhaustive_max_n (full enumeration); otherwise the randomized
/// concentration search with `n_starts` starts, two preliminary steps
/// each, and the best `n_refine` candidates iterated to convergence.
/// The scatter is the subset covariance times the consistency factor
/// c(alpha) = alpha / F_{chi^2_{p+2}}(chi^2_{p,alpha}), alpha = k/n.
McdResult mcd_raw(const Matrix& x, int k, Rng& rng, const McdOptions& options = {});

/// Reweighted MCD: weight 1 for points whose squared Mahalanobis distance
/// under the raw estimate is at most chi^2_{p,0.975}; location/scatter of
/// the weight-1 points, scatter times c1 = 0.975 / F_{chi^2_{p+2}}(cutoff).
McdResult mcd_reweighted(const Matrix& x, int k, Rng& rng, const McdOptions& options = {});

/// Default subset size floor((n + p + 1) / 2), the maximal-breakdown choice.
int mcd_default_k(int n, int p);

}  // namespace latiso
