#include "blockcov/sparsify.hpp"

#include "blockcov/errors.hpp"
#include "blockcov/lowrank.hpp"
#include "blockcov/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blockcov {
namespace {

double line_rss(const std::vector<double>& y, std::size_t first, std::size_t last_inclusive) {
  const std::size_t count = last_inclusive - first + 1;
  if (count < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = first; i <= last_inclusive; ++i) {
    mx += static_cast<double>(i);
    my += y[i];
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = first; i <= last_inclusive; ++i) {
    const double dx = static_cast<double>(i) - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  return std::max(0.0, syy - sxy * sxy / sxx);
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0)) {
    throw InvalidInput("lambda must be non-negative");
  }
}

// Squared Frobenius distance between the thresholded off-diagonal vector
// (clamped to [-1, 1]) and a reference off-diagonal vector, both halves.
double thresholded_distance_sq(const Eigen::VectorXd& y, const Eigen::VectorXd& reference, double lambda) {
  const double cut = 0.5 * lambda;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double kept = std::abs(y(j)) > cut ? std::clamp(y(j), -1.0, 1.0) : 0.0;
    const double d = kept - reference(j);
    sum += d * d;
  }
  return 2.0 * sum;
}

}  // namespace

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& y, double lambda) {
  check_lambda(lambda);
  const double cut = 0.5 * lambda;
  Eigen::VectorXd out(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double a = std::abs(y(j));
    out(j) = a > cut ? y(j) * (1.0 - lambda / (2.0 * a)) : 0.0;
  }
  return out;
}

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& y, double lambda) {
  check_lambda(lambda);
  const double cut = 0.5 * lambda;
  Eigen::VectorXd out(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    out(j) = std::abs(y(j)) > cut ? y(j) : 0.0;
  }
  return out;
}

std::vector<double> candidate_lambdas(const Eigen::VectorXd& y, int max_grid) {
  if (y.size() == 0) {
    throw InvalidInput("candidate_lambdas needs a non-empty vector");
  }
  if (max_grid < 2) {
    throw InvalidInput("candidate_lambdas needs max_grid >= 2");
  }
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(y.size()) + 1);
  all.push_back(0.0);
  for (double v : y) all.push_back(2.0 * std::abs(v));
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const auto limit = static_cast<std::size_t>(max_grid);
  if (all.size() <= limit) return all;
  std::vector<double> grid;
  grid.reserve(limit);
  const double step = static_cast<double>(all.size() - 1) / static_cast<double>(limit - 1);
  for (std::size_t k = 0; k < limit; ++k) {
    grid.push_back(all[static_cast<std::size_t>(std::llround(step * static_cast<double>(k)))]);
  }
  return grid;
}

std::size_t support_size(const Eigen::VectorXd& y, double lambda) {
  const double cut = 0.5 * lambda;
  return static_cast<std::size_t>((y.array().abs() > cut).count());
}

double lambda_for_support_size(const Eigen::VectorXd& y, std::size_t target) {
  std::vector<double> mags(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(y(j));
  if (target >= mags.size()) return 0.0;
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(target), mags.end(), std::greater<>());
  return 2.0 * mags[target];
}

CorrelationMatrix sparse_sigma(const Eigen::MatrixXd& gamma_r, double lambda, Eigen::Index q) {
  if (gamma_r.rows() != q - 1 || gamma_r.cols() != q - 1) {
    throw InvalidInput("sparse_sigma: truncated gamma must be (q-1) x (q-1)");
  }
  Eigen::VectorXd v = hard_threshold(vech(gamma_r), lambda);
  for (double& e : v) e = std::clamp(e, -1.0, 1.0);
  return assemble_sigma(v, q);
}

std::size_t two_segment_breakpoint(const std::vector<double>& curve) {
  if (curve.size() < 3) {
    throw InvalidInput("two-segment fit needs at least 3 points");
  }
  std::size_t best_k = 1;
  double best = 0.0;
  for (std::size_t k = 1; k + 1 < curve.size(); ++k) {
    const double rss = line_rss(curve, 0, k) + line_rss(curve, k, curve.size() - 1);
    if (k == 1 || rss < best) {
      best = rss;
      best_k = k;
    }
  }
  return best_k;
}

LambdaSelection select_lambda_elbow(const CorrelationMatrix& r, const Eigen::MatrixXd& gamma_r,
                                    const std::vector<double>& grid) {
  if (grid.size() < 4) {
    throw InvalidInput("elbow selection needs a grid of at least 4 values, got " + std::to_string(grid.size()));
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw InvalidInput("elbow grid must be ascending");
  }
  const Eigen::Index q = r.size();
  if (gamma_r.rows() != q - 1 || gamma_r.cols() != q - 1) {
    throw InvalidInput("elbow selection: truncated gamma must be (q-1) x (q-1)");
  }
  const Eigen::VectorXd y = vech(gamma_r);
  const Eigen::VectorXd reference = vech(build_gamma(r).values());

  LambdaSelection out;
  out.method = LambdaMethod::elbow;
  std::vector<double> curve;
  curve.reserve(grid.size());
  for (double lambda : grid) {
    check_lambda(lambda);
    const double c = std::sqrt(thresholded_distance_sq(y, reference, lambda));
    curve.push_back(c);
    out.trace.push_back({lambda, c, support_size(y, lambda)});
  }
  const std::size_t k = two_segment_breakpoint(curve);
  out.lambda = grid[k];
  out.support_size = out.trace[k].support_size;
  return out;
}

int default_train_size(Eigen::Index n) {
  const double raw = static_cast<double>(n) * (1.0 - 1.0 / std::log(static_cast<double>(n)));
  const auto rounded = static_cast<Eigen::Index>(std::llround(raw));
  return static_cast<int>(std::clamp<Eigen::Index>(rounded, 2, n - 2));
}

LambdaSelection select_lambda_bl(const ObservationMatrix& x, int r, const std::vector<double>& grid,
                                 const std::vector<std::vector<int>>& train_rows) {
  if (grid.empty()) {
    throw InvalidInput("Bickel-Levina selection needs a non-empty grid");
  }
  if (train_rows.empty()) {
    throw InvalidInput("Bickel-Levina selection needs at least one split");
  }
  const Eigen::Index n = x.n();
  const Eigen::Index q = x.q();
  std::vector<double> loss(grid.size(), 0.0);
  std::vector<double> support(grid.size(), 0.0);

  for (const auto& rows : train_rows) {
    std::vector<char> in_train(static_cast<std::size_t>(n), 0);
    for (int i : rows) {
      if (i < 0 || i >= n || in_train[static_cast<std::size_t>(i)]) {
        throw InvalidInput("Bickel-Levina split has an invalid or repeated row index");
      }
      in_train[static_cast<std::size_t>(i)] = 1;
    }
    const auto n_train = static_cast<Eigen::Index>(rows.size());
    if (n_train < 2 || n - n_train < 2) {
      throw InvalidInput("Bickel-Levina split leaves fewer than 2 samples on one side (" + std::to_string(n_train) +
                         " / " + std::to_string(n - n_train) + ")");
    }
    Eigen::MatrixXd train(n_train, q);
    Eigen::MatrixXd valid(n - n_train, q);
    Eigen::Index ti = 0;
    Eigen::Index vi = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_train[static_cast<std::size_t>(i)]) {
        train.row(ti++) = x.data().row(i);
      } else {
        valid.row(vi++) = x.data().row(i);
      }
    }
    const Eigen::VectorXd y = vech(truncate_rank(build_gamma(sample_correlation(ObservationMatrix(train))), r));
    const Eigen::VectorXd reference = vech(build_gamma(sample_correlation(ObservationMatrix(valid))).values());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      check_lambda(grid[g]);
      loss[g] += thresholded_distance_sq(y, reference, grid[g]);
      support[g] += static_cast<double>(support_size(y, grid[g]));
    }
  }

  LambdaSelection out;
  out.method = LambdaMethod::bl;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.trace.push_back({grid[g], loss[g],
                         static_cast<std::size_t>(std::llround(support[g] / static_cast<double>(train_rows.size())))});
    if (loss[g] < loss[best]) best = g;
  }
  out.lambda = grid[best];
  out.support_size = out.trace[best].support_size;
  return out;
}

LambdaSelection select_lambda_bl(const ObservationMatrix& x, int r, const std::vector<double>& grid,
                                 const BickelLevinaConfig& cfg) {
  if (x.n() < 4) {
    throw InvalidInput("Bickel-Levina selection needs n >= 4");
  }
  if (cfg.n_splits < 1) {
    throw InvalidInput("Bickel-Levina selection needs n_splits >= 1");
  }
  const int n = static_cast<int>(x.n());
  const int n_train = cfg.train_size > 0 ? cfg.train_size : default_train_size(x.n());
  std::vector<std::vector<int>> splits;
  splits.reserve(static_cast<std::size_t>(cfg.n_splits));
  for (int s = 0; s < cfg.n_splits; ++s) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)));
    std::vector<int> perm = random_permutation(n, rng);
    perm.resize(static_cast<std::size_t>(std::min(n_train, n)));
    std::sort(perm.begin(), perm.end());
    splits.push_back(std::move(perm));
  }
  return select_lambda_bl(x, r, grid, splits);
}

}  // namespace blockcov
