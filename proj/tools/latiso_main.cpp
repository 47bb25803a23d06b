// latiso: isotropy testing for lattice data.
//
// Subcommands: estimate (variogram estimates), test (isotropy test with
// subsampling or block-permutation p-values), simulate (Gaussian random
// fields with geometric anisotropy and optional contamination), benchmark
// (Monte Carlo rejection-rate sweeps).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "benchmark.hpp"
#include "json.hpp"
#include "latiso/errors.hpp"
#include "latiso/grid_io.hpp"
#include "latiso/isotest.hpp"
#include "latiso/simulate.hpp"

using namespace latiso;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

int exit_code_for(errc code) {
  switch (code) {
    case errc::invalid_argument:
    case errc::invalid_block_size:
    case errc::grid_too_small:
    case errc::size_guard_exceeded:
    case errc::block_too_small_for_lagset:
    case errc::non_square_block:
    case errc::block_exceeds_grid:
      return kExitUsage;
    case errc::parse_error:
      return kExitData;
    default:
      return kExitDegenerate;
  }
}

json lags_to_json(const LagSet& lam) {
  json out = json::array();
  for (const Lag& h : lam.lags) out.push_back({h.dx, h.dy});
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_text_file(out_path, text);
}

std::string report_to_csv(const json& j, const std::string& prefix = "") {
  std::string out;
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object())
      out += report_to_csv(value, name);
    else
      out += name + "," + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
  }
  return out;
}

ContaminationSpec parse_contamination(const std::string& spec) {
  // e.g. "isolated:eps=0.1,mu=5,sd=1" or "block:eps=0.2,mu=0,sd=5,shape=elongated"
  const size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  ContaminationSpec out;
  if (kind == "isolated")
    out.kind = ContaminationSpec::Kind::isolated;
  else if (kind == "block")
    out.kind = ContaminationSpec::Kind::block;
  else
    fail(errc::invalid_argument, "contamination kind must be 'isolated' or 'block'");
  if (colon == std::string::npos) fail(errc::invalid_argument, "missing contamination parameters");
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      fail(errc::invalid_argument, "bad contamination parameter '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (name == "eps")
      out.epsilon = std::stod(value);
    else if (name == "mu")
      out.mu0 = std::stod(value);
    else if (name == "sd")
      out.sigma0 = std::stod(value);
    else if (name == "shape") {
      if (value == "random")
        out.shape = BlockShape::random_shape;
      else if (value == "square")
        out.shape = BlockShape::square;
      else if (value == "elongated")
        out.shape = BlockShape::elongated;
      else
        fail(errc::invalid_argument, "unknown shape '" + value + "'");
    } else {
      fail(errc::invalid_argument, "unknown contamination parameter '" + name + "'");
    }
  }
  return out;
}

json contamination_to_json(const ContaminationSpec& spec) {
  json j;
  j["kind"] = spec.kind == ContaminationSpec::Kind::isolated ? "isolated" : "block";
  j["epsilon"] = spec.epsilon;
  j["mu0"] = spec.mu0;
  j["sigma0"] = spec.sigma0;
  if (spec.kind == ContaminationSpec::Kind::block)
    j["shape"] = spec.shape == BlockShape::square
                     ? "square"
                     : (spec.shape == BlockShape::elongated ? "elongated" : "random");
  return j;
}

const char* covariance_route_name(CovarianceRoute route) {
  switch (route) {
    case CovarianceRoute::mcd: return "mcd";
    case CovarianceRoute::moment: return "moment";
    case CovarianceRoute::moment_fallback: return "moment-fallback";
    case CovarianceRoute::identity_fallback: return "identity-fallback";
  }
  return "unknown";
}

struct CommonGridOptions {
  std::string grid_file;
  bool skip_header = false;
  bool standardize = false;
};

Grid load_grid(const CommonGridOptions& options, double* scale_out) {
  Grid g = read_grid_csv(options.grid_file, options.skip_header);
  if (options.standardize) {
    auto [scaled, scale] = standardize_by_mad(g);
    if (scale_out) *scale_out = scale;
    return scaled;
  }
  if (scale_out) *scale_out = 0.0;
  return g;
}

int run_estimate(const CommonGridOptions& grid_options, const std::string& lag_spec,
                 const std::string& estimator_name_arg, const std::string& restriction_name,
                 bool mcd_correction, std::uint64_t seed, const std::string& format,
                 const std::string& out_path) {
  double scale = 0.0;
  const Grid g = load_grid(grid_options, &scale);
  const LagSet lam = bench::lag_set_from_spec(lag_spec);

  Estimator estimator;
  if (estimator_name_arg == "matheron")
    estimator = Estimator::matheron;
  else if (estimator_name_arg == "genton")
    estimator = Estimator::genton;
  else if (estimator_name_arg == "mcd-diff")
    estimator = Estimator::mcd_diff;
  else
    fail(errc::invalid_argument, "unknown estimator '" + estimator_name_arg + "'");

  Restriction restriction;
  if (restriction_name == "per-lag")
    restriction = Restriction::per_lag;
  else if (restriction_name == "joint")
    restriction = Restriction::joint;
  else
    fail(errc::invalid_argument, "restriction must be per-lag or joint");

  VariogramOptions options;
  options.mcd_correction = mcd_correction;
  Rng rng(seed);
  const VariogramVector v =
      estimate_vector(g, lam, estimator, restriction, nullptr, &rng, options);

  json report;
  report["schema"] = 1;
  report["command"] = "estimate";
  report["grid"] = {{"file", grid_options.grid_file},
                    {"rows", g.rows()},
                    {"cols", g.cols()},
                    {"observed", g.observed_count()}};
  report["config"] = {{"estimator", estimator_name(estimator)},
                      {"lags", lags_to_json(lam)},
                      {"restriction", restriction_name},
                      {"standardize_mad", grid_options.standardize},
                      {"mcd_correction", mcd_correction},
                      {"seed", seed}};
  if (grid_options.standardize) report["grid"]["mad_scale"] = scale;
  json estimates = json::array();
  for (int i = 0; i < lam.size(); ++i)
    estimates.push_back({{"lag", {lam.lags[static_cast<size_t>(i)].dx,
                                  lam.lags[static_cast<size_t>(i)].dy}},
                         {"estimate", v.estimates[i]},
                         {"pairs", v.pair_counts[i]}});
  report["estimates"] = estimates;
  report["degenerate"] = v.degenerate;

  emit(format == "csv" ? report_to_csv(report) : report.dump(2) + "\n", out_path);
  return 0;
}

int run_isotropy_test(const CommonGridOptions& grid_options, const std::string& method_name_arg,
                      const std::string& estimator_name_arg, const std::string& lag_spec,
                      const TestConfig& base_config, std::uint64_t seed, double alpha,
                      const std::string& format, const std::string& out_path) {
  double scale = 0.0;
  const Grid g = load_grid(grid_options, &scale);
  const LagSet lam = bench::lag_set_from_spec(lag_spec);

  TestConfig config = base_config;
  if (estimator_name_arg == "matheron")
    config.estimator = Estimator::matheron;
  else if (estimator_name_arg == "genton")
    config.estimator = Estimator::genton;
  else if (estimator_name_arg == "mcd-diff")
    config.estimator = Estimator::mcd_diff;
  else
    fail(errc::invalid_argument, "unknown estimator '" + estimator_name_arg + "'");

  Method method;
  if (method_name_arg == "subsampling")
    method = Method::subsampling;
  else if (method_name_arg == "permutation")
    method = Method::permutation;
  else
    fail(errc::invalid_argument, "method must be subsampling or permutation");

  const TestResult result = run_test(g, lam, method, config, seed);
  if (!result.diagnostics.warning.empty())
    std::cerr << "warning: " << result.diagnostics.warning << "\n";

  json report;
  report["schema"] = 1;
  report["command"] = "test";
  report["grid"] = {{"file", grid_options.grid_file},
                    {"rows", g.rows()},
                    {"cols", g.cols()},
                    {"observed", g.observed_count()}};
  if (grid_options.standardize) report["grid"]["mad_scale"] = scale;
  report["config"] = {{"method", method_name(method)},
                      {"estimator", estimator_name(config.estimator)},
                      {"lags", lags_to_json(lam)},
                      {"B", config.B},
                      {"block_side", config.block_side},
                      {"window_side", config.window_side},
                      {"add_one_pvalue", config.add_one_pvalue},
                      {"mcd_correction", config.mcd_correction},
                      {"robust_covariance", config.robust_covariance},
                      {"standardize_mad", grid_options.standardize},
                      {"alpha", alpha},
                      {"seed", seed},
                      {"workers", config.workers}};
  report["result"] = {{"statistic", result.statistic},
                      {"d", result.d},
                      {"p_asymptotic", result.p_asymptotic},
                      {"p_resampling", result.p_resampling},
                      {"reject_at_alpha", result.p_resampling <= alpha + 1e-12}};
  json estimates = json::array();
  for (int i = 0; i < lam.size(); ++i)
    estimates.push_back({{"lag", {lam.lags[static_cast<size_t>(i)].dx,
                                  lam.lags[static_cast<size_t>(i)].dy}},
                         {"estimate", result.estimates.estimates[i]},
                         {"pairs", result.estimates.pair_counts[i]}});
  report["estimates"] = estimates;
  report["diagnostics"] = {{"regularized", result.diagnostics.regularized},
                           {"covariance_route", covariance_route_name(result.diagnostics.covariance)},
                           {"dropped_windows", result.diagnostics.dropped_windows},
                           {"k_n", result.diagnostics.k_n},
                           {"f_n", result.diagnostics.f_n},
                           {"n_eff", result.diagnostics.n_eff},
                           {"degenerate_estimates", result.diagnostics.degenerate_estimates},
                           {"warning", result.diagnostics.warning}};

  emit(format == "csv" ? report_to_csv(report) : report.dump(2) + "\n", out_path);
  return 0;
}

int run_simulate(int rows, int cols, double theta, double ratio, double range, double sill,
                 std::uint64_t seed, const std::string& contaminate_spec,
                 const std::string& out_path, int max_cells) {
  const AnisoModel model{theta, ratio, range, sill};
  Rng rng(seed);
  Rng field_rng = rng.child(0);
  Grid g = GrfSampler(rows, cols, model, max_cells).sample(field_rng);

  std::optional<ContaminationSpec> contamination;
  if (!contaminate_spec.empty()) {
    contamination = parse_contamination(contaminate_spec);
    Rng contam_rng = rng.child(1);
    g = contaminate(g, *contamination, contam_rng);
  }

  if (out_path.empty()) fail(errc::invalid_argument, "simulate requires --out");
  write_grid_csv(g, out_path);

  json sidecar;
  sidecar["schema"] = 1;
  sidecar["command"] = "simulate";
  sidecar["grid_file"] = out_path;
  sidecar["rows"] = rows;
  sidecar["cols"] = cols;
  sidecar["model"] = {{"theta", theta}, {"b", ratio}, {"range", range}, {"sill", sill}};
  sidecar["seed"] = seed;
  sidecar["contamination"] =
      contamination ? contamination_to_json(*contamination) : json(nullptr);
  write_text_file(out_path + ".json", sidecar.dump(2) + "\n");
  return 0;
}

int run_benchmark_cmd(const std::string& config_path, const std::string& out_path,
                      std::uint64_t seed, int workers) {
  std::ifstream in(config_path);
  if (!in) fail(errc::parse_error, "cannot open '" + config_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const bench::BenchmarkConfig config = bench::parse_benchmark_config(buffer.str());
  const std::string csv = bench::run_benchmark(config, seed, workers);
  emit(csv, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isotropy tests for lattice data"};
  app.require_subcommand(1);

  // ---- estimate ----
  CommonGridOptions est_grid;
  std::string est_estimator = "matheron", est_lags = "L2", est_restriction = "per-lag";
  std::string est_format = "json", est_out;
  bool est_no_correction = false;
  std::uint64_t est_seed = 1;
  CLI::App* estimate = app.add_subcommand("estimate", "variogram estimates over a lag set");
  estimate->add_option("--grid", est_grid.grid_file, "grid CSV file")->required();
  estimate->add_option("--estimator", est_estimator, "matheron|genton|mcd-diff");
  estimate->add_option("--lags", est_lags, "L1|L2|L3|custom:dx,dy;dx,dy;...");
  estimate->add_option("--restriction", est_restriction, "per-lag|joint");
  estimate->add_flag("--standardize-mad", est_grid.standardize,
                     "divide the values by their scaled MAD first");
  estimate->add_flag("--skip-header", est_grid.skip_header, "drop the first CSV line");
  estimate->add_flag("--no-mcd-correction", est_no_correction,
                     "disable the MCD.diff small-sample correction");
  estimate->add_option("--seed", est_seed, "generator seed (MCD.diff)");
  estimate->add_option("--format", est_format, "json|csv");
  estimate->add_option("--out", est_out, "output file (default stdout)");

  // ---- test ----
  CommonGridOptions test_grid;
  std::string test_method = "permutation", test_estimator = "matheron", test_lags = "L2";
  std::string test_format = "json", test_out;
  TestConfig test_config;
  bool test_no_correction = false, test_moment_cov = false;
  double alpha = 0.05;
  std::uint64_t test_seed = 0;
  CLI::App* test = app.add_subcommand("test", "isotropy test");
  test->add_option("--grid", test_grid.grid_file, "grid CSV file")->required();
  test->add_option("--method", test_method, "subsampling|permutation");
  test->add_option("--estimator", test_estimator, "matheron|genton|mcd-diff");
  test->add_option("--lags", test_lags, "L1|L2|L3|custom:dx,dy;dx,dy;...");
  test->add_option("--block-side", test_config.block_side, "permutation block side (0 = preset)");
  test->add_option("--window-side", test_config.window_side,
                   "subsampling window side (0 = round(sqrt(side)))");
  test->add_option("--B", test_config.B, "number of permuted datasets");
  test->add_option("--seed", test_seed, "generator seed")->required();
  test->add_flag("--add-one-pvalue", test_config.add_one_pvalue,
                 "use (1 + count) / (B + 1) for the permutation p-value");
  test->add_flag("--standardize-mad", test_grid.standardize,
                 "divide the values by their scaled MAD first");
  test->add_flag("--skip-header", test_grid.skip_header, "drop the first CSV line");
  test->add_flag("--no-mcd-correction", test_no_correction,
                 "disable the MCD.diff small-sample correction");
  test->add_flag("--moment-covariance", test_moment_cov,
                 "use the plain moment covariance instead of the MCD");
  test->add_option("--alpha", alpha, "significance level recorded in the report");
  test->add_option("--workers", test_config.workers, "threads for the resampling loop");
  test->add_option("--format", test_format, "json|csv");
  test->add_option("--out", test_out, "output file (default stdout)");

  // ---- simulate ----
  int sim_rows = 24, sim_cols = 24;
  double sim_theta = 0.0, sim_ratio = 1.0, sim_range = 5.0, sim_sill = 1.0;
  std::uint64_t sim_seed = 0;
  std::string sim_contaminate, sim_out;
  CLI::App* simulate = app.add_subcommand("simulate", "simulate a Gaussian random field");
  simulate->add_option("--rows", sim_rows, "grid rows");
  simulate->add_option("--cols", sim_cols, "grid columns");
  simulate->add_option("--theta", sim_theta, "anisotropy angle in radians, [0, pi)");
  simulate->add_option("--ratio", sim_ratio, "anisotropy ratio b >= 1");
  simulate->add_option("--range", sim_range, "spherical variogram range");
  simulate->add_option("--sill", sim_sill, "spherical variogram sill");
  simulate->add_option("--seed", sim_seed, "generator seed")->required();
  simulate->add_option("--contaminate", sim_contaminate,
                       "isolated:eps=..,mu=..,sd=.. | block:eps=..,mu=..,sd=..,shape=..");
  simulate->add_option("--out", sim_out, "output CSV (a .json sidecar is written next to it)")
      ->required();

  // ---- benchmark ----
  std::string bench_config, bench_out;
  std::uint64_t bench_seed = 0;
  int bench_workers = 1;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Monte Carlo rejection-rate sweep");
  benchmark->add_option("--config", bench_config, "sweep configuration JSON")->required();
  benchmark->add_option("--out", bench_out, "output CSV file")->required();
  benchmark->add_option("--seed", bench_seed, "master seed")->required();
  benchmark->add_option("--workers", bench_workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*estimate)
      return run_estimate(est_grid, est_lags, est_estimator, est_restriction,
                          !est_no_correction, est_seed, est_format, est_out);
    if (*test) {
      test_config.mcd_correction = !test_no_correction;
      test_config.robust_covariance = !test_moment_cov;
      return run_isotropy_test(test_grid, test_method, test_estimator, test_lags, test_config,
                               test_seed, alpha, test_format, test_out);
    }
    if (*simulate) {
      int max_cells = kDefaultMaxGridCells;
      if (const char* env = std::getenv("LATISO_MAX_GRID")) max_cells = std::atoi(env);
      return run_simulate(sim_rows, sim_cols, sim_theta, sim_ratio, sim_range, sim_sill,
                          sim_seed, sim_contaminate, sim_out, max_cells);
    }
    if (*benchmark) return run_benchmark_cmd(bench_config, bench_out, bench_seed, bench_workers);
  } catch (const error& e) {
    std::cerr << "latiso: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "latiso: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
