#include "benchmark.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "latiso/errors.hpp"
#include "latiso/parallel.hpp"

namespace latiso::bench {

using nlohmann::json;

namespace {

Estimator estimator_from_name(const std::string& name) {
  if (name == "matheron") return Estimator::matheron;
  if (name == "genton") return Estimator::genton;
  if (name == "mcd-diff" || name == "mcd_diff") return Estimator::mcd_diff;
  fail(errc::invalid_argument, "unknown estimator '" + name + "'");
}

Method method_from_name(const std::string& name) {
  if (name == "subsampling") return Method::subsampling;
  if (name == "permutation") return Method::permutation;
  fail(errc::invalid_argument, "unknown method '" + name + "'");
}

BlockShape shape_from_name(const std::string& name) {
  if (name == "random") return BlockShape::random_shape;
  if (name == "square") return BlockShape::square;
  if (name == "elongated") return BlockShape::elongated;
  fail(errc::invalid_argument, "unknown block shape '" + name + "'");
}

std::string format_fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

}  // namespace

LagSet lag_set_from_spec(const std::string& spec) {
  if (spec == "L1") return lambda1();
  if (spec == "L2") return lambda2();
  if (spec == "L3") return lambda3();
  if (spec.rfind("custom:", 0) == 0) {
    std::vector<Lag> lags;
    std::stringstream rest(spec.substr(7));
    std::string item;
    while (std::getline(rest, item, ';')) {
      int dx = 0, dy = 0;
      if (std::sscanf(item.c_str(), "%d,%d", &dx, &dy) != 2)
        fail(errc::invalid_argument, "bad lag '" + item + "' (expected dx,dy)");
      lags.push_back({dx, dy});
    }
    return make_lag_set(lags);
  }
  fail(errc::invalid_argument, "unknown lag set '" + spec + "' (use L1, L2, L3 or custom:...)");
}

BenchmarkConfig parse_benchmark_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("benchmark config: ") + e.what());
  }
  BenchmarkConfig config;
  try {
    config.rows = j.value("rows", config.rows);
    config.cols = j.value("cols", config.cols);
    config.sill = j.value("sill", config.sill);
    for (const json& m : j.at("models"))
      config.models.emplace_back(m.at("theta").get<double>(), m.at("b").get<double>());
    config.ranges = j.at("ranges").get<std::vector<double>>();
    for (const std::string& e : j.at("estimators").get<std::vector<std::string>>())
      config.estimators.push_back(estimator_from_name(e));
    config.lag_sets = j.at("lag_sets").get<std::vector<std::string>>();
    for (const std::string& m : j.at("methods").get<std::vector<std::string>>())
      config.methods.push_back(method_from_name(m));
    config.replications = j.value("replications", config.replications);
    config.B = j.value("B", config.B);
    config.alpha = j.value("alpha", config.alpha);
    config.block_side = j.value("block_side", 0);
    config.window_side = j.value("window_side", 0);
    config.add_one_pvalue = j.value("add_one_pvalue", false);
    config.mcd_correction = j.value("mcd_correction", true);
    config.robust_covariance = j.value("robust_covariance", true);
    config.max_cells = j.value("max_cells", kDefaultMaxGridCells);
    if (j.contains("contamination") && !j.at("contamination").is_null()) {
      const json& c = j.at("contamination");
      ContaminationSpec spec;
      const std::string kind = c.at("kind").get<std::string>();
      if (kind == "isolated")
        spec.kind = ContaminationSpec::Kind::isolated;
      else if (kind == "block")
        spec.kind = ContaminationSpec::Kind::block;
      else
        fail(errc::invalid_argument, "unknown contamination kind '" + kind + "'");
      spec.epsilon = c.at("epsilon").get<double>();
      spec.mu0 = c.value("mu0", 0.0);
      spec.sigma0 = c.value("sigma0", 1.0);
      spec.shape = shape_from_name(c.value("shape", std::string("random")));
      config.contamination = spec;
    }
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("benchmark config: ") + e.what());
  }
  if (config.replications < 50)
    fail(errc::invalid_argument, "benchmark needs at least 50 replications");
  if (config.models.empty() || config.ranges.empty() || config.estimators.empty() ||
      config.lag_sets.empty() || config.methods.empty())
    fail(errc::invalid_argument, "benchmark sweep lists must be non-empty");
  return config;
}

std::string run_benchmark(const BenchmarkConfig& config, std::uint64_t seed, int workers) {
  struct Cell {
    Method method;
    double range;
    Estimator estimator;
    size_t model_idx;
    std::string lag_spec;
    LagSet lam;
  };
  std::vector<Cell> cells;
  for (const Method method : config.methods)
    for (const double range : config.ranges)
      for (const Estimator estimator : config.estimators)
        for (size_t m = 0; m < config.models.size(); ++m)
          for (const std::string& spec : config.lag_sets)
            cells.push_back({method, range, estimator, m, spec, lag_set_from_spec(spec)});

  // one factorization per (model, range), shared read-only by all workers
  std::map<std::pair<size_t, double>, std::shared_ptr<const GrfSampler>> samplers;
  for (const Cell& cell : cells) {
    const auto key = std::make_pair(cell.model_idx, cell.range);
    if (!samplers.count(key)) {
      const auto& [theta, b] = config.models[cell.model_idx];
      samplers[key] = std::make_shared<const GrfSampler>(
          config.rows, config.cols, AnisoModel{theta, b, cell.range, config.sill},
          config.max_cells);
    }
  }

  const int reps = config.replications;
  const int n_tasks = static_cast<int>(cells.size()) * reps;
  std::vector<std::uint8_t> rejected(static_cast<size_t>(n_tasks), 0);
  const Rng master(seed);

  parallel_for(n_tasks, workers, [&](int task) {
    const int cell_idx = task / reps;
    const int rep = task % reps;
    const Cell& cell = cells[static_cast<size_t>(cell_idx)];
    Rng task_rng = master.child(static_cast<std::uint64_t>(cell_idx)).child(
        static_cast<std::uint64_t>(rep));

    Rng field_rng = task_rng.child(0);
    const auto key = std::make_pair(cell.model_idx, cell.range);
    Grid field = samplers.at(key)->sample(field_rng);
    if (config.contamination) {
      Rng contam_rng = task_rng.child(1);
      field = contaminate(field, *config.contamination, contam_rng);
    }

    TestConfig test;
    test.estimator = cell.estimator;
    test.window_side = config.window_side;
    test.block_side = config.block_side;
    test.B = config.B;
    test.add_one_pvalue = config.add_one_pvalue;
    test.mcd_correction = config.mcd_correction;
    test.robust_covariance = config.robust_covariance;
    test.workers = 1;  // parallelism lives at the replication level
    const TestResult result =
        run_test(field, cell.lam, cell.method, test, task_rng.child(2).root_seed());
    rejected[static_cast<size_t>(task)] =
        result.p_resampling <= config.alpha + 1e-12 ? 1 : 0;
  });

  // column order: model x lag set, row order: method x range x estimator
  std::string csv = "method,range,estimator";
  for (size_t m = 0; m < config.models.size(); ++m)
    for (const std::string& spec : config.lag_sets) {
      const std::string tag = "theta=" + format_fixed(config.models[m].first, 4) +
                              ";b=" + format_fixed(config.models[m].second, 4) + ";" + spec;
      csv += "," + tag + ",_se(" + tag + ")";
    }
  csv += "\n";

  for (const Method method : config.methods)
    for (const double range : config.ranges)
      for (const Estimator estimator : config.estimators) {
        csv += std::string(method_name(method)) + "," + format_fixed(range, 4) + "," +
               estimator_name(estimator);
        for (size_t m = 0; m < config.models.size(); ++m)
          for (const std::string& spec : config.lag_sets) {
            // find the cell (same construction order as above)
            size_t idx = 0;
            for (; idx < cells.size(); ++idx) {
              const Cell& c = cells[idx];
              if (c.method == method && c.range == range && c.estimator == estimator &&
                  c.model_idx == m && c.lag_spec == spec)
                break;
            }
            int hits = 0;
            for (int rep = 0; rep < reps; ++rep)
              hits += rejected[idx * static_cast<size_t>(reps) + static_cast<size_t>(rep)];
            const double rate = 100.0 * hits / reps;
            const double se = 100.0 * std::sqrt(hits / static_cast<double>(reps) *
                                                (1.0 - hits / static_cast<double>(reps)) / reps);
            csv += "," + format_fixed(rate, 1) + "," + format_fixed(se, 2);
          }
        csv += "\n";
      }
  return csv;
}

}  // namespace latiso::bench
