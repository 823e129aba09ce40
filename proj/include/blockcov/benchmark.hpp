#pragma once

#include "blockcov/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockcov {

enum class Method { empirical, blocks, blocks_fast, blocks_real, hclust, kmeans };

Method parse_method(std::string_view name);
std::string method_name(Method m);

struct BenchmarkConfig {
  std::vector<ScenarioKind> scenarios;
  std::vector<int> n_list;
  std::vector<int> q_list;
  int reps = 1;
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  int jobs = 1;
  double inv_sqrt_threshold = 0.1;
  /// Shuffle the columns of every generated sample; the "blocks" family then
  /// runs with hierarchical reordering and is scored against the permuted
  /// Sigma.
  bool permute_columns = false;
  /// Score support on Sigma-hat instead of Sigma-tilde.
  bool support_on_projection = false;
};

struct BenchmarkRow {
  ScenarioKind scenario;
  int n;
  int q;
  int rep;
  Method method;
  double frobenius_error;
  std::optional<double> tpr;
  std::optional<double> fpr;
  double whitening_error;
  double wall_seconds;
  int rank;  // 0 when the method has no rank
  std::optional<double> lambda;
  std::string error;  // non-empty when the method failed on this replicate
};

/// Seed of replicate `rep` of the (scenario, n, q) cell.
std::uint64_t replicate_seed(std::uint64_t seed, ScenarioKind scenario, int n, int q, int rep);

/// Rows sorted by (scenario, n, q, rep, method) in the order of the config
/// lists, independent of `jobs`.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg);

inline constexpr std::string_view kResultsSchema = "# blockcov-results v1";

void write_results_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace blockcov
