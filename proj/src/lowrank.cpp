#include "blockcov/lowrank.hpp"

#include "blockcov/errors.hpp"
#include "blockcov/linalg.hpp"
#include "blockcov/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace blockcov {
namespace {

// Residual sum of squares of the least-squares line through (i, s_i) for
// first <= i < last (zero-based). A single point fits exactly.
double line_rss(const Eigen::VectorXd& s, Eigen::Index first, Eigen::Index last) {
  const Eigen::Index count = last - first;
  if (count < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = first; i < last; ++i) {
    mx += static_cast<double>(i);
    my += s(i);
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (Eigen::Index i = first; i < last; ++i) {
    const double dx = static_cast<double>(i) - mx;
    const double dy = s(i) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  return std::max(0.0, syy - sxy * sxy / sxx);
}

}  // namespace

Eigen::MatrixXd truncate_rank(const GammaMatrix& gamma, int r) {
  const Eigen::Index m = gamma.size();
  if (r < 1 || r > m) {
    throw InvalidInput("rank " + std::to_string(r) + " outside 1.." + std::to_string(m));
  }
  const SymmetricEigen eig = symmetric_eigen(gamma.values());
  const Eigen::VectorXd& lambda = eig.values;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });

  Eigen::MatrixXd vectors(m, r);
  Eigen::VectorXd values(r);
  for (int k = 0; k < r; ++k) {
    vectors.col(k) = eig.vectors.col(idx[static_cast<std::size_t>(k)]);
    values(k) = lambda(idx[static_cast<std::size_t>(k)]);
  }
  Eigen::MatrixXd out = vectors * values.asDiagonal() * vectors.transpose();
  return 0.5 * (out + out.transpose());
}

ScreeValues scree(const Eigen::MatrixXd& symmetric) {
  Eigen::VectorXd v = symmetric_eigen(symmetric, false).values.cwiseAbs();
  std::sort(v.begin(), v.end(), std::greater<>());
  return {std::move(v)};
}

ScreeValues scree(const GammaMatrix& gamma) { return scree(gamma.values()); }

int default_rank_max(Eigen::Index n, Eigen::Index q) {
  const Eigen::Index cap = std::min({n - 1, q - 2, Eigen::Index{50}});
  return static_cast<int>(std::max(Eigen::Index{2}, cap));
}

RankSelection select_rank_cattell(const ScreeValues& s, int r_max) {
  const Eigen::Index len = s.values.size();
  if (len < 4) {
    throw InvalidInput("Cattell criterion needs at least 4 scree values, got " + std::to_string(len));
  }
  if (r_max < 2 || r_max > len - 1) {
    throw InvalidInput("Cattell r_max " + std::to_string(r_max) + " outside 2.." + std::to_string(len - 1));
  }
  const Eigen::Index window = std::min<Eigen::Index>(3 * static_cast<Eigen::Index>(r_max), len);

  RankSelection out;
  out.method = RankMethod::cattell;
  out.trace.reserve(static_cast<std::size_t>(r_max));
  double best = 0.0;
  for (int b = 1; b <= r_max; ++b) {
    // The elbow point b+1 belongs to both lines.
    const double rss = line_rss(s.values, 0, b + 1) + line_rss(s.values, b, window);
    out.trace.push_back(rss);
    if (b == 1 || rss < best) {
      best = rss;
      out.r = b;
    }
  }
  return out;
}

double empirical_quantile(std::vector<double>& values, double p) {
  if (values.empty()) {
    throw InvalidInput("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RankSelection select_rank_pa(const ObservationMatrix& x, const ParallelAnalysisConfig& cfg) {
  if (cfg.n_perm < 1) {
    throw InvalidInput("parallel analysis needs n_perm >= 1");
  }
  if (!(cfg.quantile > 0.0 && cfg.quantile <= 1.0)) {
    throw InvalidInput("parallel analysis quantile must lie in (0, 1]");
  }
  const Eigen::VectorXd observed = scree(build_gamma(sample_correlation(x))).values;
  const Eigen::Index len = observed.size();

  std::vector<std::vector<double>> permuted(static_cast<std::size_t>(len));
  for (auto& column : permuted) column.reserve(static_cast<std::size_t>(cfg.n_perm));

  Eigen::MatrixXd shuffled = x.data();
  for (int rep = 0; rep < cfg.n_perm; ++rep) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    shuffled = x.data();
    for (Eigen::Index c = 0; c < shuffled.cols(); ++c) {
      shuffle(std::span<double>(shuffled.col(c).data(), static_cast<std::size_t>(shuffled.rows())), rng);
    }
    const Eigen::VectorXd values = scree(build_gamma(sample_correlation(ObservationMatrix(shuffled)))).values;
    for (Eigen::Index i = 0; i < len; ++i) permuted[static_cast<std::size_t>(i)].push_back(values(i));
  }

  RankSelection out;
  out.method = RankMethod::pa;
  out.trace.reserve(static_cast<std::size_t>(len));
  for (auto& column : permuted) out.trace.push_back(empirical_quantile(column, cfg.quantile));

  int retained = 0;
  while (retained < len && observed(retained) > out.trace[static_cast<std::size_t>(retained)]) ++retained;
  out.r = std::max(1, retained);
  return out;
}

}  // namespace blockcov
