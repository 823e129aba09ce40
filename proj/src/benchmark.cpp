#include "blockcov/benchmark.hpp"

#include "blockcov/baselines.hpp"
#include "blockcov/csv.hpp"
#include "blockcov/errors.hpp"
#include "blockcov/metrics.hpp"
#include "blockcov/permute.hpp"
#include "blockcov/pipeline.hpp"
#include "blockcov/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

namespace blockcov {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Cell {
  ScenarioKind scenario;
  int n;
  int q;
  int rep;
};

struct Sample {
  Eigen::MatrixXd x;
  Eigen::MatrixXd sigma;
  SupportMask support;
  std::size_t true_support_size = 0;
};

Sample draw_sample(const BenchmarkConfig& cfg, const GroundTruth& truth, const Cell& cell) {
  const std::uint64_t seed = replicate_seed(cfg.seed, cell.scenario, cell.n, cell.q, cell.rep);
  Sample s{sample_gaussian(truth.sigma, cell.n, derive_seed(seed, 0)), truth.sigma, truth.support, 0};
  if (cfg.permute_columns) {
    auto [x, p] = permute_columns(s.x, derive_seed(seed, 1));
    s.x = std::move(x);
    s.sigma = permute_matrix(truth.sigma, p);
    s.support = permute_matrix(truth.support.cast<double>().matrix(), p).array() != 0.0;
  }
  for (Eigen::Index j = 1; j < s.support.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) s.true_support_size += s.support(i, j) ? 1 : 0;
  }
  return s;
}

BenchmarkRow evaluate(const BenchmarkConfig& cfg, const Cell& cell, Method method, const Sample& sample) {
  BenchmarkRow row{cell.scenario, cell.n, cell.q, cell.rep, method, kNaN, {}, {}, kNaN, 0.0, 0, {}, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    const ObservationMatrix x(sample.x);
    Eigen::MatrixXd sigma_hat;
    Eigen::MatrixXd support_source;
    std::optional<Eigen::MatrixXd> inverse_root;

    auto run_pipeline = [&](PipelineConfig pc) {
      pc.reorder = cfg.permute_columns;
      pc.inv_sqrt_threshold = cfg.inv_sqrt_threshold;
      CorrelationEstimate est = estimate(x, pc);
      sigma_hat = est.sigma_hat.values();
      support_source = cfg.support_on_projection ? sigma_hat : est.sigma_tilde.values();
      inverse_root = est.inv_sqrt->matrix;
      row.rank = est.rank.r;
      row.lambda = est.lambda.lambda;
    };
    auto block_constant = [&](const std::vector<int>& labels) {
      sigma_hat = block_constant_estimator(sample_correlation(x), labels).values();
      support_source = sigma_hat;
    };

    const std::uint64_t seed = derive_seed(replicate_seed(cfg.seed, cell.scenario, cell.n, cell.q, cell.rep), 2);
    switch (method) {
      case Method::empirical:
        sigma_hat = sample_correlation(x).values();
        support_source = sigma_hat;
        break;
      case Method::blocks:
        run_pipeline(full_config(seed));
        break;
      case Method::blocks_fast:
        run_pipeline(fast_config());
        break;
      case Method::blocks_real: {
        PipelineConfig pc;
        pc.rank = FixedRank{kScenarioFactors};
        pc.lambda = TargetSupportLambda{sample.true_support_size};
        run_pipeline(pc);
        break;
      }
      case Method::hclust: {
        const CorrelationMatrix r = sample_correlation(x);
        block_constant(cut_tree(hclust_complete(dissimilarity(r, Dissimilarity::one_minus_abs_corr)), kScenarioFactors));
        break;
      }
      case Method::kmeans: {
        KMeansConfig kc;
        kc.k = kScenarioFactors;
        kc.seed = seed;
        block_constant(kmeans_columns(sample.x, kc).labels);
        break;
      }
    }
    if (!inverse_root) inverse_root = inv_sqrt(sigma_hat, cfg.inv_sqrt_threshold).matrix;

    row.frobenius_error = frobenius_error(sigma_hat, sample.sigma);
    const SupportRates rates = support_confusion(sample.support, support_source);
    row.tpr = rates.tpr;
    row.fpr = rates.fpr;
    row.whitening_error = whitening_error(*inverse_root, sample.sigma);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string optional_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }

std::string number_field(double v) { return std::isfinite(v) ? csv::format_double(v) : "NA"; }

std::string quoted(const std::string& s) {
  if (s.empty()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

Method parse_method(std::string_view name) {
  static const std::map<std::string, Method, std::less<>> kMethods{
      {"empirical", Method::empirical}, {"blocks", Method::blocks}, {"blocks_fast", Method::blocks_fast},
      {"blocks_real", Method::blocks_real}, {"hclust", Method::hclust}, {"kmeans", Method::kmeans}};
  const auto it = kMethods.find(name);
  if (it == kMethods.end()) {
    throw InvalidInput("unknown method '" + std::string(name) +
                       "' (valid: empirical, blocks, blocks_fast, blocks_real, hclust, kmeans)");
  }
  return it->second;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::empirical:
      return "empirical";
    case Method::blocks:
      return "blocks";
    case Method::blocks_fast:
      return "blocks_fast";
    case Method::blocks_real:
      return "blocks_real";
    case Method::hclust:
      return "hclust";
    case Method::kmeans:
      return "kmeans";
  }
  return "unknown";
}

std::uint64_t replicate_seed(std::uint64_t seed, ScenarioKind scenario, int n, int q, int rep) {
  std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(scenario));
  s = derive_seed(s, static_cast<std::uint64_t>(n));
  s = derive_seed(s, static_cast<std::uint64_t>(q));
  return derive_seed(s, static_cast<std::uint64_t>(rep));
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.reps < 1) throw InvalidInput("benchmark needs reps >= 1");
  if (cfg.methods.empty() || cfg.scenarios.empty() || cfg.n_list.empty() || cfg.q_list.empty()) {
    throw InvalidInput("benchmark needs at least one scenario, n, q and method");
  }
  for (int n : cfg.n_list) {
    if (n < 4) throw InvalidInput("benchmark sample sizes must be >= 4");
  }

  // Sigma is drawn once per (scenario, q); samples vary per replicate.
  std::map<std::pair<int, int>, GroundTruth> truths;
  for (ScenarioKind s : cfg.scenarios) {
    for (int q : cfg.q_list) {
      const std::uint64_t truth_seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)), 1000003u + static_cast<std::uint64_t>(q));
      truths.emplace(std::pair{static_cast<int>(s), q}, build_scenario({s, q, truth_seed}));
    }
  }

  std::vector<Cell> cells;
  for (ScenarioKind s : cfg.scenarios) {
    for (int n : cfg.n_list) {
      for (int q : cfg.q_list) {
        for (int rep = 0; rep < cfg.reps; ++rep) cells.push_back({s, n, q, rep});
      }
    }
  }

  std::vector<std::vector<BenchmarkRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const Sample sample = draw_sample(cfg, truths.at({static_cast<int>(cell.scenario), cell.q}), cell);
      for (Method m : cfg.methods) results[i].push_back(evaluate(cfg, cell, m, sample));
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<BenchmarkRow> rows;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(rows));
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << kResultsSchema << '\n'
      << "scenario,n,q,rep,method,frobenius_error,tpr,fpr,whitening_error,wall_seconds,rank,lambda,error\n";
  for (const auto& r : rows) {
    out << scenario_name(r.scenario) << ',' << r.n << ',' << r.q << ',' << r.rep << ',' << method_name(r.method)
        << ',' << number_field(r.frobenius_error) << ',' << optional_field(r.tpr) << ',' << optional_field(r.fpr)
        << ',' << number_field(r.whitening_error) << ',' << csv::format_double(r.wall_seconds) << ','
        << (r.rank > 0 ? std::to_string(r.rank) : "NA") << ',' << optional_field(r.lambda) << ','
        << quoted(r.error) << '\n';
  }
}

}  // namespace blockcov
