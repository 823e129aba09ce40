#pragma once

#include "blockcov/corr_core.hpp"
#include "blockcov/errors.hpp"

#include <Eigen/Dense>

#include <vector>

namespace blockcov {

struct PsdConfig {
  double tol = 1e-7;
  int max_iter = 1000;
  double eig_floor = 1e-8;
};

/// Thrown when the alternating projections hit max_iter. Carries the last
/// iterate and the relative change reached.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(Eigen::MatrixXd last_iterate, double achieved_change, int iterations);

  const Eigen::MatrixXd& last_iterate() const noexcept { return last_; }
  double achieved_change() const noexcept { return change_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::MatrixXd last_;
  double change_;
  int iterations_;
};

struct NearestCorrelationResult {
  CorrelationMatrix matrix;
  int iterations;
  double final_change;
  /// ||Y_k - A||_F after each iteration k.
  std::vector<double> distance_to_input;
};

/// Higham's nearest correlation matrix: alternating projections onto the PSD
/// cone and the unit-diagonal set with Dykstra's correction, followed by an
/// eigenvalue floor at eig_floor * lambda_max and a rescale to unit diagonal.
NearestCorrelationResult nearest_correlation_traced(const Eigen::MatrixXd& a, const PsdConfig& cfg = {});

CorrelationMatrix nearest_correlation(const Eigen::MatrixXd& a, const PsdConfig& cfg = {});

struct InvSqrtResult {
  Eigen::MatrixXd matrix;
  int kept = 0;
  int dropped = 0;
};

/// U D_t^{-1/2} U' where eigenvalues d <= t contribute 0.
InvSqrtResult inv_sqrt(const Eigen::MatrixXd& s, double t);

/// ||W Sigma W - I||_F.
double whitening_error(const Eigen::MatrixXd& w, const Eigen::MatrixXd& sigma);

}  // namespace blockcov
