#include "blockcov/psd.hpp"

#include "blockcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blockcov {
namespace {

SymmetricEigen decompose(const Eigen::MatrixXd& m, const char* what) {
  try {
    return symmetric_eigen(m);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " in " + what);
  }
}

Eigen::MatrixXd recompose(const SymmetricEigen& eig, const Eigen::VectorXd& values) {
  const Eigen::MatrixXd& u = eig.vectors;
  Eigen::MatrixXd out = u * values.asDiagonal() * u.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
  const auto eig = decompose(m, "PSD projection");
  return recompose(eig, eig.values.cwiseMax(0.0));
}

void check_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidInput(std::string(what) + " needs a non-empty square matrix");
  }
  if (!a.allFinite()) {
    throw InvalidInput(std::string(what) + " input has non-finite entries");
  }
}

}  // namespace

ConvergenceError::ConvergenceError(Eigen::MatrixXd last_iterate, double achieved_change, int iterations)
    : NumericalError("nearest correlation did not converge after " + std::to_string(iterations) +
                     " iterations (relative change " + std::to_string(achieved_change) + ")"),
      last_(std::move(last_iterate)),
      change_(achieved_change),
      iterations_(iterations) {}

NearestCorrelationResult nearest_correlation_traced(const Eigen::MatrixXd& a, const PsdConfig& cfg) {
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1 || !(cfg.eig_floor >= 0.0)) {
    throw InvalidInput("PSD config needs tol > 0, max_iter >= 1, eig_floor >= 0");
  }
  check_square(a, "nearest_correlation");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw InvalidInput("nearest_correlation needs a symmetric matrix");
  }
  const Eigen::Index q = a.rows();
  const Eigen::MatrixXd input = 0.5 * (a + a.transpose());

  Eigen::MatrixXd y = input;
  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(q, q);
  std::vector<double> distances;
  double change = 0.0;
  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iter) {
    ++iter;
    const Eigen::MatrixXd shifted = y - correction;
    Eigen::MatrixXd x = project_psd(shifted);
    correction = x - shifted;
    x.diagonal().setOnes();
    change = (x - y).norm() / x.norm();
    y = std::move(x);
    distances.push_back((y - input).norm());
    if (change <= cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError(std::move(y), change, iter);
  }

  // Strict positive definiteness, then a congruence back to unit diagonal.
  const auto eig = decompose(y, "eigenvalue flooring");
  const double top = std::max(eig.values.maxCoeff(), 0.0);
  Eigen::MatrixXd floored = recompose(eig, eig.values.cwiseMax(cfg.eig_floor * top));
  const Eigen::VectorXd scale = floored.diagonal().cwiseSqrt().cwiseInverse();
  floored = scale.asDiagonal() * floored * scale.asDiagonal();
  for (Eigen::Index j = 0; j < q; ++j) {
    floored(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const double v = std::clamp(floored(i, j), -1.0, 1.0);
      floored(i, j) = v;
      floored(j, i) = v;
    }
  }
  return {CorrelationMatrix(std::move(floored)), iter, change, std::move(distances)};
}

CorrelationMatrix nearest_correlation(const Eigen::MatrixXd& a, const PsdConfig& cfg) {
  return nearest_correlation_traced(a, cfg).matrix;
}

InvSqrtResult inv_sqrt(const Eigen::MatrixXd& s, double t) {
  check_square(s, "inv_sqrt");
  if (!(t >= 0.0)) {
    throw InvalidInput("inv_sqrt threshold must be non-negative");
  }
  const auto eig = decompose(0.5 * (s + s.transpose()), "inverse square root");
  Eigen::VectorXd d = eig.values;
  InvSqrtResult out;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > t) {
      d(i) = 1.0 / std::sqrt(d(i));
      ++out.kept;
    } else {
      d(i) = 0.0;
      ++out.dropped;
    }
  }
  out.matrix = recompose(eig, d);
  return out;
}

double whitening_error(const Eigen::MatrixXd& w, const Eigen::MatrixXd& sigma) {
  if (w.rows() != w.cols() || sigma.rows() != sigma.cols() || w.rows() != sigma.rows()) {
    throw InvalidInput("whitening_error needs two q x q matrices of the same size");
  }
  const Eigen::MatrixXd m = w * sigma * w;
  return (m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).norm();
}

}  // namespace blockcov
