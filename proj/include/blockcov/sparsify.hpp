#pragma once

#include "blockcov/corr_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace blockcov {

/// Lasso solution for an identity design: y_j (1 - lambda / (2|y_j|)) when
/// |y_j| > lambda / 2, else 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& y, double lambda);

/// Least-squares refit of the Lasso support: y_j when |y_j| > lambda / 2.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& y, double lambda);

/// Sorted distinct values of 2|y_j| together with 0 (the points where the
/// hard-threshold support changes), thinned evenly to at most max_grid
/// points keeping both ends.
std::vector<double> candidate_lambdas(const Eigen::VectorXd& y, int max_grid = 100);

/// Sigma-tilde(lambda): hard-thresholded vech of the rank-truncated Gamma
/// placed in the upper triangle, clamped to [-1, 1], unit diagonal.
CorrelationMatrix sparse_sigma(const Eigen::MatrixXd& gamma_r, double lambda, Eigen::Index q);

/// Number of non-null retained entries of hard_threshold(y, lambda).
std::size_t support_size(const Eigen::VectorXd& y, double lambda);

/// Smallest lambda on the 2|y| scale whose hard-threshold support has at most
/// `target` entries (exactly `target` unless |y| has ties at the cut).
double lambda_for_support_size(const Eigen::VectorXd& y, std::size_t target);

enum class LambdaMethod { elbow, bl, fixed };

struct LambdaCurvePoint {
  double lambda;
  double criterion;
  std::size_t support_size;
};

struct LambdaSelection {
  double lambda = 0.0;
  LambdaMethod method = LambdaMethod::fixed;
  std::vector<LambdaCurvePoint> trace;
  std::size_t support_size = 0;
};

/// Index of the breakpoint k (1 <= k <= len-2) minimizing the RSS of two
/// least-squares lines fitted to (i, c_i) over 0..k and k..len-1. The
/// breakpoint belongs to both segments. Ties go to the smallest k.
std::size_t two_segment_breakpoint(const std::vector<double>& curve);

/// Elbow rule on c(lambda) = ||R - Sigma-tilde(lambda)||_F over the grid,
/// fitted against the grid index.
LambdaSelection select_lambda_elbow(const CorrelationMatrix& r, const Eigen::MatrixXd& gamma_r,
                                    const std::vector<double>& grid);

struct BickelLevinaConfig {
  int n_splits = 50;
  /// Training size; 0 selects round(n (1 - 1/log n)).
  int train_size = 0;
  std::uint64_t seed = 1;
};

int default_train_size(Eigen::Index n);

/// Bickel-Levina cross-validation on explicit splits: for each training row
/// set, Sigma-tilde(lambda) is built from the training correlation truncated
/// to rank r and compared with the correlation of the remaining rows. The
/// summed squared Frobenius loss is minimized over the grid (ties to the
/// smaller lambda).
LambdaSelection select_lambda_bl(const ObservationMatrix& x, int r, const std::vector<double>& grid,
                                 const std::vector<std::vector<int>>& train_rows);

/// Same, with cfg.n_splits random splits drawn from derive_seed(seed, split).
LambdaSelection select_lambda_bl(const ObservationMatrix& x, int r, const std::vector<double>& grid,
                                 const BickelLevinaConfig& cfg);

}  // namespace blockcov
