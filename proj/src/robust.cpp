#include "latiso/robust.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "latiso/chi_squared.hpp"
#include "latiso/errors.hpp"

namespace latiso {

namespace {

double median_of(std::vector<double>& v) {
  const size_t n = v.size();
  const size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    // midpoint of the two central order statistics
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (lower + m);
  }
  return m;
}

}  // namespace

double median(Eigen::Ref<const Vector> x) {
  if (x.size() < 1) fail(errc::too_few_points, "median of an empty sample");
  std::vector<double> v(x.data(), x.data() + x.size());
  return median_of(v);
}

double mad(Eigen::Ref<const Vector> x) {
  const double center = median(x);
  std::vector<double> dev(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) dev[static_cast<size_t>(i)] = std::fabs(x[i] - center);
  return 1.4826 * median_of(dev);
}

double qn_finite_sample_factor(int n) {
  // Small-sample factors for n <= 9, then the asymptotic-form correction.
  static constexpr double kSmall[] = {0.399, 0.994, 0.512, 0.844, 0.611, 0.857, 0.669, 0.872};
  if (n < 2) fail(errc::too_few_points, "Qn needs at least 2 points");
  if (n <= 9) return kSmall[n - 2];
  return (n % 2 == 1) ? n / (n + 1.4) : n / (n + 3.8);
}

double qn_scale(Eigen::Ref<const Vector> x) {
  const Eigen::Index n = x.size();
  if (n < 2) fail(errc::too_few_points, "Qn needs at least 2 points");
  const long long half = n / 2;
  const long long k = (half + 1) * half / 2;  // C(floor(n/2) + 1, 2)
  std::vector<double> gaps;
  gaps.reserve(static_cast<size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) gaps.push_back(std::fabs(x[i] - x[j]));
  std::nth_element(gaps.begin(), gaps.begin() + (k - 1), gaps.end());
  return 2.2219 * qn_finite_sample_factor(static_cast<int>(n)) * gaps[static_cast<size_t>(k - 1)];
}

int mcd_default_k(int n, int p) { return (n + p + 1) / 2; }

namespace {

// Consistency factors involve chi-squared quantiles; memoize them since the
// same (n, k, p) combinations recur thousands of times in resampling loops.
double raw_consistency_factor(int p, int k, int n) {
  if (k >= n) return 1.0;
  static std::map<std::tuple<int, int, int>, double> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({p, k, n});
  if (it != cache.end()) return it->second;
  const double alpha = static_cast<double>(k) / n;
  const double q = chi_sq_quantile(alpha, p);
  const double factor = alpha / chi_sq_cdf(q, p + 2);
  cache.insert({{p, k, n}, factor});
  return factor;
}

struct ReweightConstants {
  double cutoff;  // chi^2_{p, 0.975}
  double c1;      // 0.975 / F_{chi^2_{p+2}}(cutoff)
};

ReweightConstants reweight_constants(int p) {
  static std::map<int, ReweightConstants> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  ReweightConstants c;
  c.cutoff = chi_sq_quantile(0.975, p);
  c.c1 = 0.975 / chi_sq_cdf(c.cutoff, p + 2);
  cache.insert({p, c});
  return c;
}

struct SubsetStats {
  Vector mean;
  Matrix cov;  // sample covariance, divisor k - 1
};

SubsetStats subset_stats(const Matrix& x, const std::vector<int>& subset) {
  const Eigen::Index p = x.cols();
  const int k = static_cast<int>(subset.size());
  SubsetStats s;
  s.mean = Vector::Zero(p);
  for (int i : subset) s.mean += x.row(i).transpose();
  s.mean /= k;
  s.cov = Matrix::Zero(p, p);
  for (int i : subset) {
    const Vector d = x.row(i).transpose() - s.mean;
    s.cov.noalias() += d * d.transpose();
  }
  s.cov /= (k - 1);
  return s;
}

// Log-determinant through Cholesky; NaN when not positive definite.
double log_det_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  double ld = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = llt.matrixL()(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return std::numeric_limits<double>::quiet_NaN();
    ld += std::log(d);
  }
  return 2.0 * ld;
}

Vector squared_mahalanobis(const Matrix& x, const Vector& mean, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    fail(errc::singular_scatter, "covariance not positive definite");
  const Matrix centered = x.rowwise() - mean.transpose();
  const Matrix z = llt.matrixL().solve(centered.transpose());
  return z.colwise().squaredNorm().transpose();
}

std::vector<int> smallest_k_indices(const Vector& values, int k) {
  std::vector<int> idx(static_cast<size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), [&](int a, int b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;  // deterministic tie-break
  });
  std::vector<int> out(idx.begin(), idx.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

// Exact univariate MCD: the minimizing subset is contiguous in sorted order.
std::vector<int> unimcd_support(const Matrix& x, int k) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (x(a, 0) != x(b, 0)) return x(a, 0) < x(b, 0);
    return a < b;
  });
  std::vector<double> sum(static_cast<size_t>(n) + 1, 0.0), sumsq(static_cast<size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double v = x(order[static_cast<size_t>(i)], 0);
    sum[static_cast<size_t>(i) + 1] = sum[static_cast<size_t>(i)] + v;
    sumsq[static_cast<size_t>(i) + 1] = sumsq[static_cast<size_t>(i)] + v * v;
  }
  int best_start = 0;
  double best_ss = std::numeric_limits<double>::infinity();
  for (int s = 0; s + k <= n; ++s) {
    const double ssum = sum[static_cast<size_t>(s + k)] - sum[static_cast<size_t>(s)];
    const double ssq = sumsq[static_cast<size_t>(s + k)] - sumsq[static_cast<size_t>(s)];
    const double ss = ssq - ssum * ssum / k;  // k-1 divisor is a common factor
    if (ss < best_ss) {
      best_ss = ss;
      best_start = s;
    }
  }
  if (!(best_ss > 0.0))
    fail(errc::singular_scatter, "minimum-determinant subset has zero variance");
  std::vector<int> support(order.begin() + best_start, order.begin() + best_start + k);
  std::sort(support.begin(), support.end());
  return support;
}

std::vector<int> exhaustive_support(const Matrix& x, int k) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> comb(static_cast<size_t>(k));
  std::iota(comb.begin(), comb.end(), 0);
  std::vector<int> best;
  double best_logdet = std::numeric_limits<double>::infinity();
  while (true) {
    const SubsetStats s = subset_stats(x, comb);
    const double ld = log_det_pd(s.cov);
    if (std::isfinite(ld) && ld < best_logdet) {
      best_logdet = ld;
      best = comb;
    }
    // advance to the next k-combination in lexicographic order
    int i = k - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
  }
  if (best.empty())
    fail(errc::singular_scatter, "every candidate subset has a singular covariance");
  return best;
}

struct Candidate {
  double logdet = std::numeric_limits<double>::infinity();
  std::vector<int> subset;
};

std::vector<int> fastmcd_support(const Matrix& x, int k, Rng& rng, const McdOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  std::vector<Candidate> kept;

  for (int start = 0; start < options.n_starts; ++start) {
    // random (p+1)-subset, extended until its covariance is invertible
    std::vector<int> seed_idx;
    auto add_random_point = [&]() {
      while (true) {
        const int cand = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
        if (std::find(seed_idx.begin(), seed_idx.end(), cand) == seed_idx.end()) {
          seed_idx.push_back(cand);
          return;
        }
      }
    };
    for (int j = 0; j < p + 1; ++j) add_random_point();
    SubsetStats stats = subset_stats(x, seed_idx);
    while (!std::isfinite(log_det_pd(stats.cov)) && static_cast<int>(seed_idx.size()) < n) {
      add_random_point();
      stats = subset_stats(x, seed_idx);
    }
    if (!std::isfinite(log_det_pd(stats.cov))) continue;

    Candidate cand;
    try {
      cand.subset = smallest_k_indices(squared_mahalanobis(x, stats.mean, stats.cov), k);
      for (int step = 0; step < 2; ++step) cand.subset = c_step(x, cand.subset);
    } catch (const error& e) {
      if (e.code() == errc::singular_scatter) continue;
      throw;
    }
    cand.logdet = log_det_pd(subset_stats(x, cand.subset).cov);
    if (!std::isfinite(cand.logdet)) continue;

    kept.push_back(std::move(cand));
  }
  if (kept.empty())
    fail(errc::singular_scatter, "every concentration start collapsed to a singular covariance");

  const int keep = std::min<int>(options.n_refine, static_cast<int>(kept.size()));
  std::partial_sort(kept.begin(), kept.begin() + keep, kept.end(),
                    [](const Candidate& a, const Candidate& b) {
                      if (a.logdet != b.logdet) return a.logdet < b.logdet;
                      return a.subset < b.subset;
                    });
  kept.resize(static_cast<size_t>(keep));

  Candidate best;
  for (Candidate& cand : kept) {
    for (int iter = 0; iter < 100; ++iter) {
      std::vector<int> next;
      try {
        next = c_step(x, cand.subset);
      } catch (const error& e) {
        // concentration drove the determinant to exactly zero: the
        // estimator is degenerate on this sample
        if (e.code() == errc::singular_scatter)
          fail(errc::singular_scatter, "concentration reached an exactly singular subset");
        throw;
      }
      if (next == cand.subset) break;
      cand.subset = std::move(next);
    }
    cand.logdet = log_det_pd(subset_stats(x, cand.subset).cov);
    if (cand.logdet < best.logdet ||
        (cand.logdet == best.logdet && cand.subset < best.subset)) {
      best = cand;
    }
  }
  if (!std::isfinite(best.logdet))
    fail(errc::singular_scatter, "concentration search found no invertible covariance");
  return best.subset;
}

}  // namespace

std::vector<int> c_step(const Matrix& x, const std::vector<int>& subset) {
  const SubsetStats stats = subset_stats(x, subset);
  const Vector d2 = squared_mahalanobis(x, stats.mean, stats.cov);
  return smallest_k_indices(d2, static_cast<int>(subset.size()));
}

McdResult mcd_raw(const Matrix& x, int k, Rng& rng, const McdOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n <= p) fail(errc::too_few_points, "MCD needs more points than dimensions");
  const int k_min = mcd_default_k(n, p);
  if (k < k_min || k > n) fail(errc::invalid_argument, "subset size outside [floor((n+p+1)/2), n]");

  std::vector<int> support;
  if (k == n) {
    support.resize(static_cast<size_t>(n));
    std::iota(support.begin(), support.end(), 0);
  } else if (p == 1) {
    support = unimcd_support(x, k);
  } else if (n <= options.exhaustive_max_n) {
    support = exhaustive_support(x, k);
  } else {
    support = fastmcd_support(x, k, rng, options);
  }

  McdResult result;
  const SubsetStats stats = subset_stats(x, support);
  if (!std::isfinite(log_det_pd(stats.cov)))
    fail(errc::singular_scatter, "minimum-determinant subset has a singular covariance");
  result.correction = raw_consistency_factor(p, k, n);
  result.location = stats.mean;
  result.scatter = stats.cov * result.correction;
  result.raw_support = std::move(support);
  result.weights = Eigen::VectorXi::Zero(n);
  for (int i : result.raw_support) result.weights[i] = 1;
  return result;
}

McdResult mcd_reweighted(const Matrix& x, int k, Rng& rng, const McdOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  McdResult raw = mcd_raw(x, k, rng, options);
  const ReweightConstants constants = reweight_constants(p);
  const Vector d2 = squared_mahalanobis(x, raw.location, raw.scatter);

  McdResult result;
  result.raw_support = raw.raw_support;
  result.weights = Eigen::VectorXi::Zero(n);
  std::vector<int> kept;
  for (int i = 0; i < n; ++i)
    if (d2[i] <= constants.cutoff) {
      result.weights[i] = 1;
      kept.push_back(i);
    }
  if (static_cast<int>(kept.size()) < p + 1)
    fail(errc::too_few_weighted, "fewer than p + 1 points received weight 1");

  const SubsetStats stats = subset_stats(x, kept);
  result.correction = constants.c1;
  result.location = stats.mean;
  result.scatter = stats.cov * constants.c1;
  if (!std::isfinite(log_det_pd(result.scatter)))
    fail(errc::singular_scatter, "reweighted covariance is singular");
  return result;
}

}  // namespace latiso
