#include "blockcov/pipeline.hpp"

#include "blockcov/errors.hpp"
#include "blockcov/random.hpp"

#include <chrono>
#include <string>
#include <utility>

namespace blockcov {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class F>
auto run_step(const char* step, double& elapsed, F&& body) {
  Stopwatch watch;
  try {
    auto result = body();
    elapsed += watch.seconds();
    return result;
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(step, e.what());
  }
}

}  // namespace

PipelineError::PipelineError(std::string step, const std::string& message)
    : std::runtime_error(step + ": " + message), step_(std::move(step)) {}

PipelineConfig fast_config() { return PipelineConfig{}; }

PipelineConfig full_config(std::uint64_t seed) {
  PipelineConfig cfg;
  ParallelAnalysisRank pa;
  pa.cfg.seed = derive_seed(seed, 1);
  cfg.rank = pa;
  BickelLevinaLambda bl;
  bl.cfg.seed = derive_seed(seed, 2);
  cfg.lambda = bl;
  return cfg;
}

CorrelationEstimate estimate(const ObservationMatrix& x, const PipelineConfig& cfg) {
  StepTimings timings;
  const Eigen::Index q = x.q();

  auto reordered = run_step("reorder", timings.reorder, [&] {
    if (!cfg.reorder) return std::pair{Permutation::identity(static_cast<int>(q)), x};
    Permutation p = leaf_order(hclust_complete(dissimilarity(x, cfg.dissimilarity)));
    return std::pair{p, ObservationMatrix(permute_columns_by(x.data(), p))};
  });
  Permutation permutation = std::move(reordered.first);
  const ObservationMatrix work = std::move(reordered.second);

  const CorrelationMatrix r = run_step("correlation", timings.rank, [&] { return sample_correlation(work); });

  struct RankStep {
    ScreeValues scree;
    RankSelection rank;
    Eigen::MatrixXd gamma_r;
  };
  RankStep rank_step = run_step("rank", timings.rank, [&] {
    const GammaMatrix gamma = build_gamma(r);
    ScreeValues values = scree(gamma);
    RankSelection rank = std::visit(
        overloaded{
            [&](const CattellRank& c) {
              const int len = static_cast<int>(values.values.size());
              const int r_max = c.r_max > 0 ? c.r_max : std::min(default_rank_max(work.n(), q), len - 1);
              return select_rank_cattell(values, r_max);
            },
            [&](const ParallelAnalysisRank& p) { return select_rank_pa(work, p.cfg); },
            [&](const FixedRank& f) {
              if (f.r < 1 || f.r > q - 1) {
                throw InvalidInput("fixed rank " + std::to_string(f.r) + " outside 1.." + std::to_string(q - 1));
              }
              RankSelection sel;
              sel.r = f.r;
              sel.method = RankMethod::fixed;
              return sel;
            },
        },
        cfg.rank);
    Eigen::MatrixXd gamma_r = truncate_rank(gamma, rank.r);
    return RankStep{std::move(values), std::move(rank), std::move(gamma_r)};
  });

  struct LambdaStep {
    LambdaSelection lambda;
    CorrelationMatrix sigma_tilde;
  };
  LambdaStep lambda_step = run_step("lambda", timings.lambda, [&] {
    const Eigen::VectorXd y = vech(rank_step.gamma_r);
    LambdaSelection sel = std::visit(
        overloaded{
            [&](const ElbowLambda& e) {
              return select_lambda_elbow(r, rank_step.gamma_r, candidate_lambdas(y, e.max_grid));
            },
            [&](const BickelLevinaLambda& b) {
              return select_lambda_bl(work, rank_step.rank.r, candidate_lambdas(y, b.max_grid), b.cfg);
            },
            [&](const FixedLambda& f) {
              if (!(f.lambda >= 0.0)) throw InvalidInput("fixed lambda must be non-negative");
              LambdaSelection s;
              s.lambda = f.lambda;
              return s;
            },
            [&](const TargetSupportLambda& t) {
              LambdaSelection s;
              s.lambda = lambda_for_support_size(y, t.support_size);
              return s;
            },
        },
        cfg.lambda);
    sel.support_size = support_size(y, sel.lambda);
    CorrelationMatrix tilde = sparse_sigma(rank_step.gamma_r, sel.lambda, q);
    return LambdaStep{std::move(sel), std::move(tilde)};
  });

  NearestCorrelationResult projected =
      run_step("psd", timings.psd, [&] { return nearest_correlation_traced(lambda_step.sigma_tilde.values(), cfg.psd); });

  std::optional<InvSqrtResult> inverse_root;
  if (cfg.compute_inv_sqrt) {
    inverse_root = run_step("inv_sqrt", timings.inv_sqrt,
                            [&] { return inv_sqrt(projected.matrix.values(), cfg.inv_sqrt_threshold); });
  }

  CorrelationMatrix sigma_hat = std::move(projected.matrix);
  CorrelationMatrix sigma_tilde = std::move(lambda_step.sigma_tilde);
  if (cfg.reorder) {
    sigma_hat = CorrelationMatrix(permute_matrix(sigma_hat.values(), permutation, true));
    sigma_tilde = CorrelationMatrix(permute_matrix(sigma_tilde.values(), permutation, true));
    if (inverse_root) inverse_root->matrix = permute_matrix(inverse_root->matrix, permutation, true);
  }

  SelectionTrace trace{rank_step.scree.values, rank_step.rank.trace, lambda_step.lambda.trace};
  return CorrelationEstimate{std::move(sigma_hat),
                             std::move(sigma_tilde),
                             std::move(inverse_root),
                             std::move(rank_step.rank),
                             std::move(lambda_step.lambda),
                             std::move(permutation),
                             std::move(trace),
                             projected.iterations,
                             timings};
}

Eigen::MatrixXd whiten(const Eigen::MatrixXd& x, const CorrelationEstimate& est) {
  if (!est.inv_sqrt) {
    throw InvalidInput("whiten: estimate has no inverse square root");
  }
  if (x.cols() != est.inv_sqrt->matrix.rows()) {
    throw InvalidInput("whiten: column count does not match the estimate");
  }
  return x * est.inv_sqrt->matrix;
}

}  // namespace blockcov
