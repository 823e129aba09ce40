#pragma once

#include "blockcov/psd.hpp"
#include "blockcov/simulate.hpp"

#include <Eigen/Dense>

#include <optional>

namespace blockcov {

double frobenius_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Rates are empty when their denominator is zero.
struct SupportRates {
  std::optional<double> tpr;
  std::optional<double> fpr;
  long true_positives = 0;
  long false_positives = 0;
  long true_negatives = 0;
  long false_negatives = 0;
};

/// Compares strictly-upper positions only; an estimate entry counts as
/// non-null when its magnitude exceeds zero_tol.
SupportRates support_confusion(const SupportMask& truth, const Eigen::MatrixXd& estimate,
                               double zero_tol = 1e-12);

// whitening_error is declared in psd.hpp.

}  // namespace blockcov
