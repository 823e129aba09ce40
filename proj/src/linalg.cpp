#include "blockcov/linalg.hpp"

#include "blockcov/errors.hpp"

#include <lapacke.h>

#include <string>

namespace blockcov {

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m, bool with_vectors) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("symmetric_eigen needs a square matrix");
  }
  const auto n = static_cast<lapack_int>(m.rows());
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  Eigen::MatrixXd work = m;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n, work.data(), n, out.values.data());
  if (info != 0) {
    throw NumericalError("symmetric eigendecomposition failed (LAPACK info " + std::to_string(info) + ")");
  }
  if (with_vectors) out.vectors = std::move(work);
  return out;
}

}  // namespace blockcov
