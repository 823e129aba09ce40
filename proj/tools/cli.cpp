#include "cli.hpp"

#include "blockcov/benchmark.hpp"
#include "blockcov/csv.hpp"
#include "blockcov/errors.hpp"
#include "blockcov/linalg.hpp"
#include "blockcov/pipeline.hpp"
#include "blockcov/random.hpp"
#include "blockcov/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace blockcov::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

/// Flag values that cannot be checked by CLI11 alone.
class FlagError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BLOCKCOV_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw FlagError(std::string("BLOCKCOV_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

struct EstimateOptions {
  std::string input;
  bool header = false;
  std::string rank = "cattell";
  std::string lambda = "elbow";
  bool reorder = false;
  std::string dissimilarity = "one_minus_abs_corr";
  double inv_sqrt_threshold = 0.1;
  double psd_tol = 1e-7;
  int psd_max_iter = 1000;
  int n_perm = 50;
  double pa_quantile = 0.95;
  int bl_splits = 50;
  int max_grid = 100;
  std::optional<std::uint64_t> seed;
  std::string out_sigma;
  std::string out_invsqrt;
  std::string out_report;
  std::string out_permutation;
};

void add_input_options(CLI::App& cmd, EstimateOptions& o) {
  cmd.add_option("--input", o.input, "Observation CSV: rows are samples, columns are variables")->required();
  cmd.add_flag("--header", o.header, "Input CSV starts with a row of variable names");
  cmd.add_option("--rank", o.rank, "Rank selection: cattell, pa, or a fixed rank >= 1")->capture_default_str();
  cmd.add_option("--lambda", o.lambda, "Threshold selection: elbow, bl, or a fixed lambda >= 0")
      ->capture_default_str();
  cmd.add_option("--n-perm", o.n_perm, "Parallel analysis replicates")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--pa-quantile", o.pa_quantile, "Parallel analysis quantile")
      ->capture_default_str()
      ->check(CLI::Range(1e-12, 1.0));
  cmd.add_option("--bl-splits", o.bl_splits, "Bickel-Levina random splits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--max-grid", o.max_grid, "Maximum number of candidate lambdas")
      ->capture_default_str()
      ->check(CLI::Range(4, 1000000));
  cmd.add_option("--seed", o.seed, "Random seed (default: $BLOCKCOV_SEED, else 1)");
}

PipelineConfig pipeline_config(const EstimateOptions& o, Eigen::Index q, std::uint64_t seed) {
  PipelineConfig cfg;
  if (o.rank == "cattell") {
    cfg.rank = CattellRank{};
  } else if (o.rank == "pa") {
    ParallelAnalysisRank pa;
    pa.cfg = {o.n_perm, o.pa_quantile, derive_seed(seed, 1)};
    cfg.rank = pa;
  } else {
    int r = 0;
    try {
      std::size_t used = 0;
      r = std::stoi(o.rank, &used);
      if (used != o.rank.size()) throw std::invalid_argument(o.rank);
    } catch (const std::exception&) {
      throw FlagError("--rank must be cattell, pa or an integer, got '" + o.rank + "'");
    }
    if (r < 1 || r > q - 1) {
      throw FlagError("--rank " + std::to_string(r) + " outside 1.." + std::to_string(q - 1));
    }
    cfg.rank = FixedRank{r};
  }

  if (o.lambda == "elbow") {
    cfg.lambda = ElbowLambda{o.max_grid};
  } else if (o.lambda == "bl") {
    BickelLevinaLambda bl;
    bl.cfg.n_splits = o.bl_splits;
    bl.cfg.seed = derive_seed(seed, 2);
    bl.max_grid = o.max_grid;
    cfg.lambda = bl;
  } else {
    double v = -1.0;
    try {
      std::size_t used = 0;
      v = std::stod(o.lambda, &used);
      if (used != o.lambda.size()) throw std::invalid_argument(o.lambda);
    } catch (const std::exception&) {
      throw FlagError("--lambda must be elbow, bl or a number, got '" + o.lambda + "'");
    }
    if (!(v >= 0.0) || !std::isfinite(v)) throw FlagError("--lambda must be non-negative");
    cfg.lambda = FixedLambda{v};
  }
  cfg.reorder = o.reorder;
  cfg.dissimilarity = parse_dissimilarity(o.dissimilarity);
  cfg.psd.tol = o.psd_tol;
  cfg.psd.max_iter = o.psd_max_iter;
  cfg.inv_sqrt_threshold = o.inv_sqrt_threshold;
  return cfg;
}

const char* rank_method_name(RankMethod m) {
  switch (m) {
    case RankMethod::cattell:
      return "cattell";
    case RankMethod::pa:
      return "pa";
    case RankMethod::fixed:
      return "fixed";
  }
  return "unknown";
}

const char* lambda_method_name(LambdaMethod m) {
  switch (m) {
    case LambdaMethod::elbow:
      return "elbow";
    case LambdaMethod::bl:
      return "bl";
    case LambdaMethod::fixed:
      return "fixed";
  }
  return "unknown";
}

ObservationMatrix load_observations(const EstimateOptions& o) {
  if (!fs::exists(o.input)) throw IoError("input file not found: " + o.input);
  return ObservationMatrix(csv::read_matrix(o.input, o.header).values);
}

int cmd_estimate(const EstimateOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const ObservationMatrix x = load_observations(o);
  const std::uint64_t seed = resolve_seed(o.seed);
  const PipelineConfig cfg = pipeline_config(o, x.q(), seed);
  const CorrelationEstimate est = estimate(x, cfg);

  if (!o.out_sigma.empty()) csv::write_matrix(o.out_sigma, est.sigma_hat.values());
  if (!o.out_invsqrt.empty()) csv::write_matrix(o.out_invsqrt, est.inv_sqrt->matrix);
  if (!o.out_permutation.empty()) {
    std::vector<int> one_based(est.permutation.order);
    for (int& v : one_based) ++v;
    csv::write_column(o.out_permutation, "order", one_based);
  }

  const Eigen::VectorXd spectrum = symmetric_eigen(est.sigma_hat.values(), false).values;
  nlohmann::ordered_json report;
  report["n"] = x.n();
  report["q"] = x.q();
  report["seed"] = seed;
  report["rank"] = est.rank.r;
  report["rank_method"] = rank_method_name(est.rank.method);
  report["lambda"] = est.lambda.lambda;
  report["lambda_method"] = lambda_method_name(est.lambda.method);
  report["support_size"] = est.lambda.support_size;
  report["off_diagonal_count"] = off_diagonal_count(static_cast<std::size_t>(x.q()));
  report["reorder"] = cfg.reorder;
  report["psd_iterations"] = est.psd_iterations;
  report["eigenvalue_min"] = spectrum.minCoeff();
  report["eigenvalue_max"] = spectrum.maxCoeff();
  report["inv_sqrt_threshold"] = cfg.inv_sqrt_threshold;
  report["inv_sqrt_kept"] = est.inv_sqrt->kept;
  report["inv_sqrt_dropped"] = est.inv_sqrt->dropped;
  report["timings_seconds"] = {{"reorder", est.timings.reorder},
                               {"rank", est.timings.rank},
                               {"lambda", est.timings.lambda},
                               {"psd", est.timings.psd},
                               {"inv_sqrt", est.timings.inv_sqrt},
                               {"total", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  const std::string text = report.dump(2) + "\n";
  if (o.out_report.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.out_report);
    if (!(out << text)) throw IoError("cannot write " + o.out_report);
  }
  return kExitOk;
}

struct SimulateOptions {
  std::string scenario;
  int q = 100;
  int n = 30;
  std::optional<std::uint64_t> seed;
  std::string out_x;
  std::string out_sigma;
  std::string out_support;
  std::string out_z;
  bool permute = false;
};

int cmd_simulate(const SimulateOptions& o) {
  const ScenarioKind kind = parse_scenario(o.scenario);
  const std::uint64_t seed = resolve_seed(o.seed);
  const GroundTruth truth = build_scenario({kind, o.q, derive_seed(seed, 0)});
  Eigen::MatrixXd x = sample_gaussian(truth.sigma, o.n, derive_seed(seed, 1));
  Eigen::MatrixXd sigma = truth.sigma;
  Eigen::MatrixXd support = truth.support.cast<double>();
  Eigen::MatrixXd z = truth.z;
  if (o.permute) {
    auto [permuted, p] = permute_columns(x, derive_seed(seed, 2));
    x = std::move(permuted);
    sigma = permute_matrix(sigma, p);
    support = permute_matrix(support, p);
    Eigen::MatrixXd zp(z.rows(), z.cols());
    for (int i = 0; i < p.size(); ++i) zp.row(i) = z.row(p.order[static_cast<std::size_t>(i)]);
    z = std::move(zp);
    std::vector<int> one_based(p.order);
    for (int& v : one_based) ++v;
    const fs::path anchor = !o.out_x.empty() ? fs::path(o.out_x) : fs::path(o.out_sigma);
    csv::write_column(anchor.parent_path() / "perm.csv", "original_index", one_based);
  }
  if (!o.out_x.empty()) csv::write_matrix(o.out_x, x);
  if (!o.out_sigma.empty()) csv::write_matrix(o.out_sigma, sigma);
  if (!o.out_support.empty()) csv::write_matrix(o.out_support, support);
  if (!o.out_z.empty()) csv::write_matrix(o.out_z, z);
  return kExitOk;
}

struct BenchmarkOptions {
  std::vector<std::string> scenarios{"diagonal-equal", "diagonal-unequal", "extra-diagonal-equal",
                                     "extra-diagonal-unequal"};
  std::vector<int> n_list{10, 30, 50};
  std::vector<int> q_list{100, 500};
  int reps = 100;
  std::vector<std::string> methods{"empirical", "blocks", "blocks_fast", "blocks_real", "hclust", "kmeans"};
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  double inv_sqrt_threshold = 0.1;
  bool permute = false;
  bool support_on_projection = false;
  std::string out;
};

int cmd_benchmark(const BenchmarkOptions& o) {
  BenchmarkConfig cfg;
  for (const auto& s : o.scenarios) cfg.scenarios.push_back(parse_scenario(s));
  for (const auto& m : o.methods) cfg.methods.push_back(parse_method(m));
  cfg.n_list = o.n_list;
  cfg.q_list = o.q_list;
  cfg.reps = o.reps;
  cfg.seed = resolve_seed(o.seed);
  cfg.jobs = o.jobs;
  cfg.inv_sqrt_threshold = o.inv_sqrt_threshold;
  cfg.permute_columns = o.permute;
  cfg.support_on_projection = o.support_on_projection;
  const auto rows = run_benchmark(cfg);
  if (o.out.empty()) {
    write_results_csv(std::cout, rows);
  } else {
    std::ofstream out(o.out);
    if (!out) throw IoError("cannot write " + o.out);
    write_results_csv(out, rows);
  }
  return kExitOk;
}

struct TraceOptions {
  EstimateOptions input;
  bool pa = false;
  std::string out_scree;
  std::string out_elbow;
};

// Least-squares line through (i, s_i), first <= i <= last, evaluated at i.
std::vector<double> fitted_line(const Eigen::VectorXd& s, Eigen::Index first, Eigen::Index last) {
  const Eigen::Index count = last - first + 1;
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = first; i <= last; ++i) {
    mx += static_cast<double>(i);
    my += s(i);
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0;
  double sxy = 0.0;
  for (Eigen::Index i = first; i <= last; ++i) {
    sxx += (static_cast<double>(i) - mx) * (static_cast<double>(i) - mx);
    sxy += (static_cast<double>(i) - mx) * (s(i) - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  std::vector<double> out;
  for (Eigen::Index i = first; i <= last; ++i) out.push_back(my + slope * (static_cast<double>(i) - mx));
  return out;
}

std::string field(double v) { return std::isfinite(v) ? csv::format_double(v) : "NA"; }

int cmd_trace(const TraceOptions& o) {
  const ObservationMatrix x = load_observations(o.input);
  const std::uint64_t seed = resolve_seed(o.input.seed);
  PipelineConfig cfg = pipeline_config(o.input, x.q(), seed);
  cfg.compute_inv_sqrt = false;
  const CorrelationEstimate est = estimate(x, cfg);
  const Eigen::VectorXd& s = est.trace.scree;
  const Eigen::Index len = s.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Cattell diagnostics are always computed on the observed scree.
  const int r_max = std::min(default_rank_max(x.n(), x.q()), static_cast<int>(len) - 1);
  std::vector<double> rss(static_cast<std::size_t>(len), nan);
  std::vector<double> fit(static_cast<std::size_t>(len), nan);
  if (len >= 4) {
    const RankSelection cattell = select_rank_cattell({s}, r_max);
    for (std::size_t b = 0; b < cattell.trace.size(); ++b) rss[b] = cattell.trace[b];
    const Eigen::Index window = std::min<Eigen::Index>(3 * static_cast<Eigen::Index>(r_max), len);
    const auto left = fitted_line(s, 0, cattell.r);
    const auto right = fitted_line(s, cattell.r, window - 1);
    for (std::size_t i = 0; i < left.size(); ++i) fit[i] = left[i];
    for (std::size_t i = 0; i < right.size(); ++i) fit[static_cast<std::size_t>(cattell.r) + i] = right[i];
  }
  std::vector<double> quantile(static_cast<std::size_t>(len), nan);
  if (o.pa) {
    const RankSelection pa = select_rank_pa(x, {o.input.n_perm, o.input.pa_quantile, derive_seed(seed, 1)});
    for (std::size_t i = 0; i < pa.trace.size(); ++i) quantile[i] = pa.trace[i];
  }

  std::ofstream scree_out(o.out_scree);
  if (!scree_out) throw IoError("cannot write " + o.out_scree);
  scree_out << "index,singular_value,cattell_fit,cattell_rss,pa_quantile\n";
  for (Eigen::Index i = 0; i < len; ++i) {
    const auto u = static_cast<std::size_t>(i);
    scree_out << i + 1 << ',' << field(s(i)) << ',' << field(fit[u]) << ',' << field(rss[u]) << ','
              << field(quantile[u]) << '\n';
  }

  std::ofstream elbow_out(o.out_elbow);
  if (!elbow_out) throw IoError("cannot write " + o.out_elbow);
  elbow_out << "lambda,criterion,support_size,selected\n";
  for (const auto& p : est.trace.lambda_curve) {
    elbow_out << field(p.lambda) << ',' << field(p.criterion) << ',' << p.support_size << ','
              << (p.lambda == est.lambda.lambda ? 1 : 0) << '\n';
  }
  if (!scree_out || !elbow_out) throw IoError("failed writing trace output");
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Block-structured sparse correlation estimation"};
  app.name("blockcov");
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a correlation matrix and its inverse square root");
  add_input_options(*estimate_cmd, est);
  estimate_cmd->add_flag("--reorder", est.reorder, "Reorder variables by hierarchical clustering first");
  estimate_cmd->add_option("--dissimilarity", est.dissimilarity,
                           "Reordering dissimilarity: one_minus_abs_corr, one_minus_corr, euclidean_columns")
      ->capture_default_str();
  estimate_cmd->add_option("--inv-sqrt-threshold", est.inv_sqrt_threshold, "Eigenvalues <= T are dropped")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  estimate_cmd->add_option("--psd-tol", est.psd_tol, "Nearest-correlation relative tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  estimate_cmd->add_option("--psd-max-iter", est.psd_max_iter, "Nearest-correlation iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  estimate_cmd->add_option("--out-sigma", est.out_sigma, "Write the estimated correlation matrix (CSV)");
  estimate_cmd->add_option("--out-invsqrt", est.out_invsqrt, "Write the thresholded inverse square root (CSV)");
  estimate_cmd->add_option("--out-permutation", est.out_permutation,
                           "Write the reordering used (1-based original indices, CSV)");
  estimate_cmd->add_option("--out-report", est.out_report, "Write the JSON report here instead of stdout");

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand(
      "simulate",
      "Draw a Gaussian sample from a synthetic block scenario. With --permute-columns the outputs describe the "
      "permuted variables and perm.csv (next to --out-x) lists the original index of each column, 1-based");
  simulate_cmd
      ->add_option("--scenario", sim.scenario,
                   "diagonal-equal, diagonal-unequal, extra-diagonal-equal or extra-diagonal-unequal")
      ->required();
  simulate_cmd->add_option("--q", sim.q, "Number of variables")->capture_default_str()->check(CLI::Range(10, 1000000));
  simulate_cmd->add_option("--n", sim.n, "Number of samples")->capture_default_str()->check(CLI::Range(2, 100000000));
  simulate_cmd->add_option("--seed", sim.seed, "Random seed (default: $BLOCKCOV_SEED, else 1)");
  simulate_cmd->add_option("--out-x", sim.out_x, "Observations CSV (n rows, q columns)");
  simulate_cmd->add_option("--out-sigma", sim.out_sigma, "True correlation matrix CSV");
  simulate_cmd->add_option("--out-support", sim.out_support, "0/1 off-diagonal support mask CSV");
  simulate_cmd->add_option("--out-z", sim.out_z, "Loading matrix Z CSV (q x 5)");
  simulate_cmd->add_flag("--permute-columns", sim.permute, "Randomly permute the variables");

  BenchmarkOptions bench;
  auto* benchmark_cmd = app.add_subcommand(
      "benchmark",
      "Replicated comparison of estimators on the synthetic scenarios. Output columns: scenario, n, q, rep, "
      "method, frobenius_error, tpr, fpr, whitening_error, wall_seconds, rank, lambda, error");
  benchmark_cmd->add_option("--scenarios", bench.scenarios, "Comma-separated scenario names")
      ->delimiter(',')
      ->capture_default_str();
  benchmark_cmd->add_option("--n-list", bench.n_list, "Comma-separated sample sizes")
      ->delimiter(',')
      ->capture_default_str();
  benchmark_cmd->add_option("--q-list", bench.q_list, "Comma-separated variable counts")
      ->delimiter(',')
      ->capture_default_str();
  benchmark_cmd->add_option("--reps", bench.reps, "Replications per cell")->capture_default_str()->check(CLI::PositiveNumber);
  benchmark_cmd
      ->add_option("--methods", bench.methods,
                   "Comma-separated: empirical, blocks, blocks_fast, blocks_real, hclust, kmeans")
      ->delimiter(',')
      ->capture_default_str();
  benchmark_cmd->add_option("--seed", bench.seed, "Master seed (default: $BLOCKCOV_SEED, else 1)");
  benchmark_cmd->add_option("--jobs", bench.jobs, "Concurrent replications")->capture_default_str()->check(CLI::PositiveNumber);
  benchmark_cmd->add_option("--inv-sqrt-threshold", bench.inv_sqrt_threshold, "Threshold t for the inverse square root")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  benchmark_cmd->add_flag("--permute-columns", bench.permute,
                          "Shuffle variables; block methods then reorder by hierarchical clustering");
  benchmark_cmd->add_flag("--support-on-projection", bench.support_on_projection,
                          "Score support on the projected estimate instead of the thresholded one");
  benchmark_cmd->add_option("--out", bench.out, "Results CSV (default: stdout)");

  TraceOptions trace;
  auto* trace_cmd = app.add_subcommand(
      "trace",
      "Write selection diagnostics. scree.csv: index, singular_value (of Gamma, descending), cattell_fit (two-line "
      "fit at the chosen breakpoint), cattell_rss (total RSS when the breakpoint is at this index), pa_quantile "
      "(with --pa). elbow.csv: lambda, criterion (||R - Sigma-tilde(lambda)||_F, or the cross-validation loss "
      "with --lambda bl), support_size, selected");
  add_input_options(*trace_cmd, trace.input);
  trace_cmd->add_flag("--pa", trace.pa, "Also compute parallel-analysis quantiles");
  trace_cmd->add_option("--out-scree", trace.out_scree, "Scree CSV")->required();
  trace_cmd->add_option("--out-elbow", trace.out_elbow, "Lambda curve CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*estimate_cmd) return cmd_estimate(est);
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*benchmark_cmd) return cmd_benchmark(bench);
    if (*trace_cmd) return cmd_trace(trace);
  } catch (const PipelineError& e) {
    std::cerr << "blockcov: numerical failure in step " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "blockcov: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "blockcov: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace blockcov::cli
