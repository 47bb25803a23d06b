// Regenerates the small-sample correction table for the MCD.diff variogram
// estimate (src/mcd_correction.cpp). For each vector dimension p and grid
// side m it simulates standard-normal white-noise grids, whose true
// variogram is 2 at every lag, estimates the p lags (1,0)..(p,0) jointly
// with the uncorrected reweighted-MCD route, and reports
//   factor = 2 / (mean over replications of the mean diagonal entry).
//
// Usage: mcd_calibrate [--reps N] [--workers N]

#include <atomic>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "latiso/grid.hpp"
#include "latiso/parallel.hpp"
#include "latiso/rng.hpp"
#include "latiso/variogram.hpp"

using namespace latiso;

namespace {

struct BucketResult {
  int n_vectors;
  double factor;
};

BucketResult calibrate(int p, int side, int reps, int workers) {
  std::vector<Lag> lags;
  for (int l = 1; l <= p; ++l) lags.push_back({l, 0});

  std::vector<double> means(static_cast<size_t>(reps), 0.0);
  parallel_for(reps, workers, [&](int rep) {
    Rng rng(0x5eedULL + static_cast<std::uint64_t>(rep) * 1000003ULL +
            static_cast<std::uint64_t>(p) * 29ULL + static_cast<std::uint64_t>(side));
    Grid g(side, side);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) g(x, y) = rng.normal();

    VariogramOptions options;
    options.mcd_correction = false;
    Rng fit_rng = rng.child(1);
    const Vector est = mcd_diff(g, lags, joint_pair_set_of(g, lags), fit_rng, options);
    means[static_cast<size_t>(rep)] = est.mean();
  });

  double total = 0.0;
  for (double m : means) total += m;
  const double mean = total / reps;
  return {(side - p) * side, 2.0 / mean};
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 1000;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) reps = std::atoi(argv[++i]);
    if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) workers = std::atoi(argv[++i]);
  }

  const std::vector<std::vector<int>> sides = {
      {3, 4, 5, 6, 7, 8, 10, 12, 14, 17, 20, 24, 28, 34},  // p = 1
      {4, 5, 6, 7, 8, 10, 12, 14, 17, 20, 24, 28, 34},     // p = 2
      {5, 6, 7, 8, 10, 12, 14, 17, 20, 24, 28, 34},        // p = 3
      {6, 7, 8, 10, 12, 14, 17, 20, 24, 28, 34},           // p = 4
  };

  for (int p = 1; p <= 4; ++p) {
    std::printf("const Entry kTableP%d[] = {\n    ", p);
    int emitted = 0;
    for (int side : sides[static_cast<size_t>(p - 1)]) {
      const BucketResult r = calibrate(p, side, reps, workers);
      std::printf("{%d, %.4f}, ", r.n_vectors, r.factor);
      std::fflush(stdout);
      if (++emitted % 6 == 0) std::printf("\n    ");
    }
    std::printf("\n};\n");
  }
  return 0;
}
