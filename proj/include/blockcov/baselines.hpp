#pragma once

#include "blockcov/corr_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace blockcov {

/// Block-constant estimator: each cluster-pair block of R is replaced by its
/// mean (off-diagonal pairs only for within-cluster blocks). Labels are
/// 0..k-1 and every label must be used.
CorrelationMatrix block_constant_estimator(const CorrelationMatrix& r, const std::vector<int>& labels);

struct KMeansConfig {
  int k = 2;
  std::uint64_t seed = 1;
  int n_init = 10;
  int max_iter = 100;
};

struct KMeansResult {
  std::vector<int> labels;
  double within_ss = 0.0;
};

/// Lloyd's algorithm on the columns of x (q points in R^n), k-means++ starts,
/// best of n_init restarts by within-cluster sum of squares (ties to the
/// lowest restart). Labels are renumbered by first appearance.
KMeansResult kmeans_columns(const Eigen::MatrixXd& x, const KMeansConfig& cfg);

}  // namespace blockcov
