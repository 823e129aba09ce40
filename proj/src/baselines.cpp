#include "blockcov/baselines.hpp"

#include "blockcov/errors.hpp"
#include "blockcov/random.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace blockcov {

CorrelationMatrix block_constant_estimator(const CorrelationMatrix& r, const std::vector<int>& labels) {
  const Eigen::Index q = r.size();
  if (static_cast<Eigen::Index>(labels.size()) != q) {
    throw InvalidInput("block_constant_estimator: " + std::to_string(labels.size()) + " labels for q = " +
                       std::to_string(q));
  }
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> count(static_cast<std::size_t>(k), 0.0);
  for (int l : labels) {
    if (l < 0) throw InvalidInput("block_constant_estimator: negative label");
    count[static_cast<std::size_t>(l)] += 1.0;
  }
  for (int c = 0; c < k; ++c) {
    if (count[static_cast<std::size_t>(c)] == 0.0) {
      throw InvalidInput("block_constant_estimator: cluster " + std::to_string(c) + " is empty");
    }
  }

  // Sums over unordered pairs, indexed (min label, max label).
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const int a = labels[static_cast<std::size_t>(i)];
      const int b = labels[static_cast<std::size_t>(j)];
      sums(std::min(a, b), std::max(a, b)) += r(i, j);
    }
  }
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(k, k);
  for (int b = 0; b < k; ++b) {
    for (int a = 0; a <= b; ++a) {
      const double na = count[static_cast<std::size_t>(a)];
      const double nb = count[static_cast<std::size_t>(b)];
      const double pairs = a == b ? na * (na - 1.0) / 2.0 : na * nb;
      rho(a, b) = pairs > 0.0 ? std::clamp(sums(a, b) / pairs, -1.0, 1.0) : 0.0;
      rho(b, a) = rho(a, b);
    }
  }

  Eigen::MatrixXd out(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = 0; i < q; ++i) {
      out(i, j) = i == j ? 1.0 : rho(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
    }
  }
  return CorrelationMatrix(std::move(out));
}

namespace {

struct Clustering {
  std::vector<int> labels;
  double within_ss;
};

double sq_dist(const Eigen::MatrixXd& points, Eigen::Index p, const Eigen::MatrixXd& centers, Eigen::Index c) {
  return (points.col(p) - centers.col(c)).squaredNorm();
}

Clustering lloyd(const Eigen::MatrixXd& points, int k, int max_iter, Rng& rng) {
  const Eigen::Index m = points.cols();
  Eigen::MatrixXd centers(points.rows(), k);

  // k-means++ seeding.
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  Eigen::Index pick = static_cast<Eigen::Index>(uniform(0.0, 1.0, rng) * static_cast<double>(m));
  pick = std::min(pick, m - 1);
  for (int c = 0; c < k; ++c) {
    centers.col(c) = points.col(pick);
    for (Eigen::Index p = 0; p < m; ++p) nearest(p) = std::min(nearest(p), sq_dist(points, p, centers, c));
    if (c + 1 == k) break;
    const double total = nearest.sum();
    if (total <= 0.0) break;  // guarded by the distinct-column check
    double target = uniform(0.0, total, rng);
    pick = m - 1;
    for (Eigen::Index p = 0; p < m; ++p) {
      if (nearest(p) <= 0.0) continue;
      target -= nearest(p);
      if (target < 0.0) {
        pick = p;
        break;
      }
    }
    while (nearest(pick) <= 0.0) --pick;
  }

  std::vector<int> labels(static_cast<std::size_t>(m), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index p = 0; p < m; ++p) {
      int best = 0;
      double best_d = sq_dist(points, p, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points, p, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(p)] != best) {
        labels[static_cast<std::size_t>(p)] = best;
        changed = true;
      }
    }
    // Empty clusters take the point farthest from its center.
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index p = 0; p < m; ++p) {
        const int l = labels[static_cast<std::size_t>(p)];
        if (sizes[static_cast<std::size_t>(l)] < 2) continue;
        const double d = sq_dist(points, p, centers, l);
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
      changed = true;
    }
    centers.setZero();
    for (Eigen::Index p = 0; p < m; ++p) centers.col(labels[static_cast<std::size_t>(p)]) += points.col(p);
    for (int c = 0; c < k; ++c) centers.col(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }

  double wss = 0.0;
  for (Eigen::Index p = 0; p < m; ++p) wss += sq_dist(points, p, centers, labels[static_cast<std::size_t>(p)]);
  return {std::move(labels), wss};
}

std::vector<int> renumber_by_first_appearance(const std::vector<int>& labels, int k) {
  std::vector<int> map(static_cast<std::size_t>(k), -1);
  int next = 0;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int& m = map[static_cast<std::size_t>(labels[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

}  // namespace

KMeansResult kmeans_columns(const Eigen::MatrixXd& x, const KMeansConfig& cfg) {
  const Eigen::Index q = x.cols();
  if (cfg.k < 1 || cfg.k > q) {
    throw InvalidInput("kmeans: k = " + std::to_string(cfg.k) + " outside 1.." + std::to_string(q));
  }
  if (cfg.n_init < 1 || cfg.max_iter < 1) {
    throw InvalidInput("kmeans needs n_init >= 1 and max_iter >= 1");
  }
  Eigen::Index distinct = 0;
  for (Eigen::Index j = 0; j < q && distinct < cfg.k; ++j) {
    bool seen = false;
    for (Eigen::Index i = 0; i < j && !seen; ++i) seen = x.col(i) == x.col(j);
    if (!seen) ++distinct;
  }
  if (distinct < cfg.k) {
    throw InvalidInput("kmeans: k = " + std::to_string(cfg.k) + " exceeds the number of distinct columns");
  }

  Clustering best{{}, std::numeric_limits<double>::infinity()};
  for (int restart = 0; restart < cfg.n_init; ++restart) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    Clustering c = lloyd(x, cfg.k, cfg.max_iter, rng);
    if (c.within_ss < best.within_ss) best = std::move(c);
  }
  return {renumber_by_first_appearance(best.labels, cfg.k), best.within_ss};
}

}  // namespace blockcov
