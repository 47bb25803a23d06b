#include "latiso/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latiso/errors.hpp"
#include "latiso/robust.hpp"

namespace latiso {

const char* estimator_name(Estimator e) noexcept {
  switch (e) {
    case Estimator::matheron: return "matheron";
    case Estimator::genton: return "genton";
    case Estimator::mcd_diff: return "mcd-diff";
  }
  return "unknown";
}

namespace {

Vector difference_sample(const Grid& grid, Lag h, const std::vector<GridPos>& locations) {
  Vector v(static_cast<Eigen::Index>(locations.size()));
  Eigen::Index i = 0;
  for (const GridPos& s : locations) v[i++] = grid(s.x, s.y) - grid(s.x + h.dx, s.y + h.dy);
  return v;
}

int gcd_int(int a, int b) { return std::gcd(std::abs(a), std::abs(b)); }

/// Primitive direction of a lag, sign-normalized so that h and -h map to
/// the same axis. Lags on a common axis form one MCD.diff group.
Lag primitive_direction(Lag h) {
  const int g = gcd_int(h.dx, h.dy);
  Lag dir{h.dx / g, h.dy / g};
  if (dir.dx < 0 || (dir.dx == 0 && dir.dy < 0)) dir = negate(dir);
  return dir;
}

}  // namespace

std::pair<double, int> matheron(const Grid& grid, Lag h, const std::vector<GridPos>& locations) {
  if (locations.empty()) fail(errc::empty_locations, "no anchor locations for the lag");
  double sum = 0.0;
  for (const GridPos& s : locations) {
    const double d = grid(s.x, s.y) - grid(s.x + h.dx, s.y + h.dy);
    sum += d * d;
  }
  return {sum / static_cast<double>(locations.size()), static_cast<int>(locations.size())};
}

std::pair<double, int> genton(const Grid& grid, Lag h, const std::vector<GridPos>& locations) {
  if (locations.empty()) fail(errc::empty_locations, "no anchor locations for the lag");
  if (locations.size() < 2) fail(errc::too_few_points, "Genton estimate needs at least 2 differences");
  const Vector v = difference_sample(grid, h, locations);
  const double q = qn_scale(v);
  return {q * q, static_cast<int>(locations.size())};
}

Vector mcd_diff(const Grid& grid, const std::vector<Lag>& lags,
                const std::vector<GridPos>& locations, Rng& rng,
                const VariogramOptions& options, bool* degenerate, int* n_vectors) {
  if (degenerate) *degenerate = false;
  const int p = static_cast<int>(lags.size());
  if (p < 1) fail(errc::invalid_argument, "MCD.diff needs at least one lag");
  const Lag dir = primitive_direction(lags.front());
  for (const Lag& h : lags)
    if (primitive_direction(h) != dir)
      fail(errc::invalid_argument, "MCD.diff lags must share one direction");

  // Keep only anchors with every component present.
  std::vector<GridPos> anchors;
  anchors.reserve(locations.size());
  for (const GridPos& s : locations) {
    bool ok = !grid.is_missing(s.x, s.y);
    for (const Lag& h : lags) {
      if (!ok) break;
      ok = grid.in_grid(s.x + h.dx, s.y + h.dy) && !grid.is_missing(s.x + h.dx, s.y + h.dy);
    }
    if (ok) anchors.push_back(s);
  }
  const int n = static_cast<int>(anchors.size());
  if (n_vectors) *n_vectors = n;
  if (n < 2 * p + 1)
    fail(errc::too_few_vectors, "need at least 2*h_max + 1 difference vectors");

  Matrix w(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      w(i, j) = grid(anchors[static_cast<size_t>(i)].x, anchors[static_cast<size_t>(i)].y) -
                grid(anchors[static_cast<size_t>(i)].x + lags[static_cast<size_t>(j)].dx,
                     anchors[static_cast<size_t>(i)].y + lags[static_cast<size_t>(j)].dy);

  // Zero-variability sample: report exact zeros with a flag so constant
  // regions do not abort a test.
  bool constant = true;
  for (int j = 0; j < p && constant; ++j)
    constant = (w.col(j).maxCoeff() - w.col(j).minCoeff()) == 0.0;
  if (constant) {
    if (degenerate) *degenerate = true;
    return Vector::Zero(p);
  }

  const int k = options.mcd_k > 0 ? options.mcd_k : mcd_default_k(n, p);
  const McdResult fit = mcd_reweighted(w, k, rng);
  Vector estimates = fit.scatter.diagonal();
  if (options.mcd_correction) estimates *= mcd_diff_correction(n, p);
  return estimates;
}

VariogramVector estimate_vector(const Grid& grid, const LagSet& lam, Estimator estimator,
                                Restriction restriction, const std::vector<Block>* blocks,
                                Rng* rng, const VariogramOptions& options) {
  if (restriction == Restriction::within_blocks && (blocks == nullptr || blocks->empty()))
    fail(errc::invalid_argument, "within-blocks restriction requires a block partition");
  if (estimator == Estimator::mcd_diff && rng == nullptr)
    fail(errc::invalid_argument, "MCD.diff requires a generator");

  VariogramVector out;
  out.lam = lam;
  out.estimator = estimator;
  out.restriction = restriction;
  out.estimates = Vector::Zero(lam.size());
  out.pair_counts = Eigen::VectorXi::Zero(lam.size());

  std::vector<GridPos> joint;
  if (restriction == Restriction::joint) joint = joint_pair_set(grid, lam);

  if (estimator == Estimator::mcd_diff) {
    // One joint estimate per direction group.
    std::vector<Lag> directions;
    std::vector<std::vector<int>> members;
    for (int i = 0; i < lam.size(); ++i) {
      const Lag dir = primitive_direction(lam.lags[static_cast<size_t>(i)]);
      auto it = std::find(directions.begin(), directions.end(), dir);
      if (it == directions.end()) {
        directions.push_back(dir);
        members.push_back({i});
      } else {
        members[static_cast<size_t>(it - directions.begin())].push_back(i);
      }
    }
    for (size_t g = 0; g < directions.size(); ++g) {
      std::vector<Lag> group_lags;
      for (int i : members[g]) group_lags.push_back(lam.lags[static_cast<size_t>(i)]);
      std::vector<GridPos> anchors;
      switch (restriction) {
        case Restriction::per_lag: anchors = joint_pair_set_of(grid, group_lags); break;
        case Restriction::joint: anchors = joint; break;
        case Restriction::within_blocks:
          anchors = within_block_joint_pair_set(grid, group_lags, *blocks);
          break;
      }
      bool degen = false;
      int n_vectors = 0;
      Rng stream = rng->child(g);
      const Vector est = mcd_diff(grid, group_lags, anchors, stream, options, &degen, &n_vectors);
      if (degen) out.degenerate = true;
      for (size_t j = 0; j < members[g].size(); ++j) {
        out.estimates[members[g][j]] = est[static_cast<Eigen::Index>(j)];
        out.pair_counts[members[g][j]] = n_vectors;
      }
    }
    return out;
  }

  for (int i = 0; i < lam.size(); ++i) {
    const Lag h = lam.lags[static_cast<size_t>(i)];
    std::vector<GridPos> anchors;
    switch (restriction) {
      case Restriction::per_lag: anchors = pair_set(grid, h); break;
      case Restriction::joint: anchors = joint; break;
      case Restriction::within_blocks: anchors = within_block_pair_set(grid, h, *blocks); break;
    }
    const auto [estimate, count] =
        estimator == Estimator::matheron ? matheron(grid, h, anchors) : genton(grid, h, anchors);
    out.estimates[i] = estimate;
    out.pair_counts[i] = count;
  }
  return out;
}

}  // namespace latiso
