#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace blockcov {

/// n x q sample matrix: rows are observations, columns are variables.
///
/// Construction rejects fewer than two rows or columns and non-finite entries.
/// Zero-variance columns are detected later, by sample_correlation, so the
/// error can name the column.
class ObservationMatrix {
 public:
  explicit ObservationMatrix(Eigen::MatrixXd data);

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  Eigen::Index n() const noexcept { return data_.rows(); }
  Eigen::Index q() const noexcept { return data_.cols(); }

 private:
  Eigen::MatrixXd data_;
};

/// Symmetric q x q matrix with an exact unit diagonal and entries in [-1, 1].
class CorrelationMatrix {
 public:
  /// Validates symmetry, unit diagonal and the entry bound (1e-12 slack on the
  /// bound only).
  explicit CorrelationMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

 private:
  Eigen::MatrixXd values_;
};

/// (q-1) x (q-1) symmetric matrix holding every strictly-upper entry of a
/// q x q correlation matrix: gamma(i, j) = R(i, j + 1) for i <= j.
class GammaMatrix {
 public:
  explicit GammaMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.rows(); }

 private:
  Eigen::MatrixXd values_;
};

/// Pearson correlation with the unbiased (n - 1) covariance about column means.
/// The diagonal is set to exactly 1. Throws InvalidInput naming the first
/// zero-variance column.
CorrelationMatrix sample_correlation(const ObservationMatrix& x);

GammaMatrix build_gamma(const CorrelationMatrix& r);

/// Half-vectorization: columns of the lower-including-diagonal triangle,
/// stacked left to right. Length m(m+1)/2.
Eigen::VectorXd vech(const Eigen::MatrixXd& a);

/// Offset of entry (row, col), row >= col, of an m x m matrix inside vech.
std::size_t vech_index(std::size_t m, std::size_t row, std::size_t col);

/// Number of strictly-upper entries of a q x q matrix, q(q-1)/2.
constexpr std::size_t off_diagonal_count(std::size_t q) { return q * (q - 1) / 2; }

/// Inverse of vech(build_gamma(.)): unit diagonal, upper triangle from v,
/// lower triangle by symmetry. Does not check the [-1, 1] bound, so the
/// result is a raw matrix.
Eigen::MatrixXd assemble_sigma_raw(const Eigen::VectorXd& v, Eigen::Index q);

CorrelationMatrix assemble_sigma(const Eigen::VectorXd& v, Eigen::Index q);

/// Position (row, col), row < col, in R addressed by vech offset k of Gamma.
struct UpperPosition {
  Eigen::Index row;
  Eigen::Index col;
};
UpperPosition gamma_vech_position(Eigen::Index q, std::size_t k);

}  // namespace blockcov
