#include "blockcov/metrics.hpp"

#include "blockcov/errors.hpp"

#include <cmath>

namespace blockcov {

double frobenius_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("frobenius_error: shape mismatch");
  }
  return (a - b).norm();
}

SupportRates support_confusion(const SupportMask& truth, const Eigen::MatrixXd& estimate, double zero_tol) {
  const Eigen::Index q = truth.rows();
  if (truth.cols() != q || estimate.rows() != q || estimate.cols() != q) {
    throw InvalidInput("support_confusion: shape mismatch");
  }
  SupportRates out;
  for (Eigen::Index j = 1; j < q; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const bool predicted = std::abs(estimate(i, j)) > zero_tol;
      if (truth(i, j)) {
        predicted ? ++out.true_positives : ++out.false_negatives;
      } else {
        predicted ? ++out.false_positives : ++out.true_negatives;
      }
    }
  }
  const long positives = out.true_positives + out.false_negatives;
  const long negatives = out.false_positives + out.true_negatives;
  if (positives > 0) out.tpr = static_cast<double>(out.true_positives) / static_cast<double>(positives);
  if (negatives > 0) out.fpr = static_cast<double>(out.false_positives) / static_cast<double>(negatives);
  return out;
}

}  // namespace blockcov
