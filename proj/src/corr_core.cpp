#include "blockcov/corr_core.hpp"

#include "blockcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blockcov {

ObservationMatrix::ObservationMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 2) {
    throw InvalidInput("observation matrix needs at least 2 rows, got " + std::to_string(data_.rows()));
  }
  if (data_.cols() < 2) {
    throw InvalidInput("observation matrix needs at least 2 columns, got " + std::to_string(data_.cols()));
  }
  if (!data_.allFinite()) {
    throw InvalidInput("observation matrix contains non-finite entries");
  }
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  const Eigen::Index q = values_.rows();
  if (q != values_.cols() || q < 1) {
    throw InvalidInput("correlation matrix must be square and non-empty");
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    if (values_(j, j) != 1.0) {
      throw InvalidInput("correlation matrix diagonal entry " + std::to_string(j) + " is not 1");
    }
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const double v = values_(i, j);
      if (v != values_(j, i)) {
        throw InvalidInput("correlation matrix is not symmetric");
      }
      if (!(std::abs(v) <= 1.0 + 1e-12)) {
        throw InvalidInput("correlation matrix entry outside [-1, 1]");
      }
    }
  }
}

GammaMatrix::GammaMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() < 1) {
    throw InvalidInput("gamma matrix must be square and non-empty");
  }
  if (values_ != values_.transpose()) {
    throw InvalidInput("gamma matrix is not symmetric");
  }
}

CorrelationMatrix sample_correlation(const ObservationMatrix& x) {
  const Eigen::MatrixXd& e = x.data();
  const Eigen::Index q = x.q();
  const Eigen::MatrixXd centered = e.rowwise() - e.colwise().mean();
  Eigen::MatrixXd s = centered.transpose() * centered;
  s /= static_cast<double>(x.n() - 1);

  for (Eigen::Index j = 0; j < q; ++j) {
    if (!(s(j, j) > 0.0)) {
      throw InvalidInput("column " + std::to_string(j) + " has zero sample variance");
    }
  }
  Eigen::MatrixXd r(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const double v = std::clamp(s(i, j) / std::sqrt(s(i, i) * s(j, j)), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return CorrelationMatrix(std::move(r));
}

GammaMatrix build_gamma(const CorrelationMatrix& r) {
  const Eigen::Index m = r.size() - 1;
  if (m < 1) {
    throw InvalidInput("gamma needs q >= 2");
  }
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      g(i, j) = r(i, j + 1);
      g(j, i) = g(i, j);
    }
  }
  return GammaMatrix(std::move(g));
}

std::size_t vech_index(std::size_t m, std::size_t row, std::size_t col) {
  return col * m - col * (col - 1) / 2 + (row - col);
}

Eigen::VectorXd vech(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInput("vech needs a square matrix");
  }
  const Eigen::Index m = a.rows();
  Eigen::VectorXd v(m * (m + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::Index len = m - c;
    v.segment(k, len) = a.col(c).tail(len);
    k += len;
  }
  return v;
}

UpperPosition gamma_vech_position(Eigen::Index q, std::size_t k) {
  // vech walks Gamma column c, rows c..m-1; Gamma(row, c) = R(c, row + 1).
  const auto m = static_cast<std::size_t>(q - 1);
  std::size_t c = 0;
  while (k >= m - c) {
    k -= m - c;
    ++c;
  }
  return {static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c + k + 1)};
}

Eigen::MatrixXd assemble_sigma_raw(const Eigen::VectorXd& v, Eigen::Index q) {
  if (q < 2 || static_cast<std::size_t>(v.size()) != off_diagonal_count(static_cast<std::size_t>(q))) {
    throw InvalidInput("assemble_sigma: vector length " + std::to_string(v.size()) + " does not match q = " +
                       std::to_string(q));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(q, q);
  const Eigen::Index m = q - 1;
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index row = c; row < m; ++row, ++k) {
      s(c, row + 1) = v(k);
      s(row + 1, c) = v(k);
    }
  }
  return s;
}

CorrelationMatrix assemble_sigma(const Eigen::VectorXd& v, Eigen::Index q) {
  return CorrelationMatrix(assemble_sigma_raw(v, q));
}

}  // namespace blockcov
