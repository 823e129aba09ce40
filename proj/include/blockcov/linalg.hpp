#pragma once

#include <Eigen/Dense>

namespace blockcov {

/// Eigendecomposition of a symmetric matrix (lower triangle is read).
/// Eigenvalues ascend; `vectors` is empty when only values are requested.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Divide-and-conquer LAPACK solver. Throws NumericalError on failure.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m, bool with_vectors = true);

}  // namespace blockcov
