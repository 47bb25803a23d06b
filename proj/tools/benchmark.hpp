#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latiso/isotest.hpp"
#include "latiso/simulate.hpp"

namespace latiso::bench {

/// One Monte Carlo sweep: the cross product of (theta, b) pairs, ranges,
/// estimators, lag sets and methods, each run for `replications` seeded
/// repetitions on freshly simulated (optionally contaminated) fields.
struct BenchmarkConfig {
  int rows = 24;
  int cols = 24;
  double sill = 1.0;
  std::vector<std::pair<double, double>> models;  // (theta, b)
  std::vector<double> ranges;
  std::vector<Estimator> estimators;
  std::vector<std::string> lag_sets;  // "L1" | "L2" | "L3" | "custom:..."
  std::vector<Method> methods;
  int replications = 200;
  int B = 1000;
  double alpha = 0.05;
  int block_side = 0;   // 0 = default for the grid side
  int window_side = 0;  // 0 = default
  bool add_one_pvalue = false;
  bool mcd_correction = true;
  bool robust_covariance = true;
  std::optional<ContaminationSpec> contamination;
  int max_cells = kDefaultMaxGridCells;
};

BenchmarkConfig parse_benchmark_config(const std::string& json_text);

LagSet lag_set_from_spec(const std::string& spec);

/// Runs the sweep and renders the rejection-rate table as CSV: one row per
/// (method, range, estimator), one percentage column and one binomial
/// standard-error column per (theta, b, lag set). Deterministic in
/// (config, seed); the worker count never changes the output.
std::string run_benchmark(const BenchmarkConfig& config, std::uint64_t seed, int workers);

}  // namespace latiso::bench
