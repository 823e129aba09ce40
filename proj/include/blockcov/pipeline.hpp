#pragma once

#include "blockcov/corr_core.hpp"
#include "blockcov/lowrank.hpp"
#include "blockcov/permute.hpp"
#include "blockcov/psd.hpp"
#include "blockcov/sparsify.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace blockcov {

struct CattellRank {
  int r_max = 0;  // 0: default_rank_max(n, q)
};
struct ParallelAnalysisRank {
  ParallelAnalysisConfig cfg;
};
struct FixedRank {
  int r = 1;
};
using RankPolicy = std::variant<CattellRank, ParallelAnalysisRank, FixedRank>;

struct ElbowLambda {
  int max_grid = 100;
};
struct BickelLevinaLambda {
  BickelLevinaConfig cfg;
  int max_grid = 100;
};
struct FixedLambda {
  double lambda = 0.0;
};
/// Picks the lambda whose hard-threshold support has the given size.
struct TargetSupportLambda {
  std::size_t support_size = 0;
};
using LambdaPolicy = std::variant<ElbowLambda, BickelLevinaLambda, FixedLambda, TargetSupportLambda>;

struct PipelineConfig {
  RankPolicy rank = CattellRank{};
  LambdaPolicy lambda = ElbowLambda{};
  bool reorder = false;
  Dissimilarity dissimilarity = Dissimilarity::one_minus_abs_corr;
  PsdConfig psd;
  bool compute_inv_sqrt = true;
  double inv_sqrt_threshold = 0.1;
};

/// "blocks_fast": Cattell + Elbow.
PipelineConfig fast_config();
/// "blocks": parallel analysis + Bickel-Levina.
PipelineConfig full_config(std::uint64_t seed);

struct SelectionTrace {
  Eigen::VectorXd scree;
  std::vector<double> rank_criterion;
  std::vector<LambdaCurvePoint> lambda_curve;
};

struct StepTimings {
  double reorder = 0.0;
  double rank = 0.0;
  double lambda = 0.0;
  double psd = 0.0;
  double inv_sqrt = 0.0;
};

/// Everything is reported in the input's variable order.
struct CorrelationEstimate {
  CorrelationMatrix sigma_hat;
  CorrelationMatrix sigma_tilde;
  std::optional<InvSqrtResult> inv_sqrt;
  RankSelection rank;
  LambdaSelection lambda;
  Permutation permutation;
  SelectionTrace trace;
  int psd_iterations = 0;
  StepTimings timings;
};

/// Failure inside one pipeline step; step() names it.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string step, const std::string& message);
  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

CorrelationEstimate estimate(const ObservationMatrix& x, const PipelineConfig& cfg);

/// X Sigma-hat^{-1/2}. Throws InvalidInput when the estimate has no inverse
/// square root.
Eigen::MatrixXd whiten(const Eigen::MatrixXd& x, const CorrelationEstimate& est);

}  // namespace blockcov
