#pragma once

#include "blockcov/corr_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace blockcov {

/// Singular values of Gamma in non-increasing order.
struct ScreeValues {
  Eigen::VectorXd values;
};

enum class RankMethod { cattell, pa, fixed };

struct RankSelection {
  int r = 1;
  RankMethod method = RankMethod::fixed;
  /// Cattell: total two-segment RSS for breakpoints 1..r_max (entry b-1).
  /// PA: per-index quantile of the permuted scree values.
  std::vector<double> trace;
};

/// Best rank-r approximation of the symmetric matrix gamma, keeping the r
/// eigenpairs of largest |eigenvalue| and symmetrizing the result.
Eigen::MatrixXd truncate_rank(const GammaMatrix& gamma, int r);

ScreeValues scree(const GammaMatrix& gamma);
ScreeValues scree(const Eigen::MatrixXd& symmetric);

/// Default r_max: min(n - 1, q - 2, 50), at least 2. q - 2 keeps it below
/// the scree length q - 1 as select_rank_cattell requires.
int default_rank_max(Eigen::Index n, Eigen::Index q);

/// Cattell's scree test as a two-segment line fit. For each breakpoint b in
/// 1..r_max one line is fitted to (i, s_i), i <= b+1, and one to i in
/// b+1..min(3 r_max, len), so the elbow point lies on both. The first b with
/// minimal total RSS wins.
RankSelection select_rank_cattell(const ScreeValues& s, int r_max);

struct ParallelAnalysisConfig {
  int n_perm = 50;
  double quantile = 0.95;
  std::uint64_t seed = 1;
};

/// Horn's parallel analysis. Each replicate shuffles every column of x
/// independently (substream derive_seed(seed, replicate)), recomputes the
/// Gamma scree, and the observed scree is compared index by index against
/// the empirical quantile (linear interpolation between order statistics).
/// r is the length of the leading run of retained components, at least 1.
RankSelection select_rank_pa(const ObservationMatrix& x, const ParallelAnalysisConfig& cfg);

/// Interpolated empirical quantile, Hyndman-Fan type 7. `values` is sorted
/// in place.
double empirical_quantile(std::vector<double>& values, double p);

}  // namespace blockcov
