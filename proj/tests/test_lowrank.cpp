#include "blockcov/errors.hpp"
#include "blockcov/lowrank.hpp"
#include "blockcov/random.hpp"
#include "blockcov/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace blockcov;

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = standard_normal(rng);
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_observations(Eigen::Index n, Eigen::Index q, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = standard_normal(rng);
  return x;
}

ScreeValues make_scree(std::initializer_list<double> v) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s(i++) = x;
  return {s};
}

// RSS of the least-squares line through (i, s_i), i in [first, last), via a
// QR solve of the two-column design matrix.
double ls_rss(const Eigen::VectorXd& s, Eigen::Index first, Eigen::Index last) {
  const Eigen::Index m = last - first;
  if (m < 2) return 0.0;
  Eigen::MatrixXd design(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) design.row(i) << 1.0, static_cast<double>(first + i);
  const Eigen::VectorXd y = s.segment(first, m);
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  return (design * beta - y).squaredNorm();
}

// Exhaustive two-segment scan with the elbow point shared by both lines.
int cattell_oracle(const Eigen::VectorXd& s, int r_max) {
  const Eigen::Index window = std::min<Eigen::Index>(3 * r_max, s.size());
  int best_b = 0;
  double best = INFINITY;
  for (int b = 1; b <= r_max; ++b) {
    const double rss = ls_rss(s, 0, b + 1) + ls_rss(s, b, window);
    if (b == 1 || rss < best - 1e-12 * std::max(1.0, best)) {
      best = rss;
      best_b = b;
    }
  }
  return best_b;
}

Eigen::VectorXd oracle_scree(const Eigen::MatrixXd& x) {
  // Correlation, gamma and spectrum computed without the library helpers.
  const Eigen::Index q = x.cols();
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::MatrixXd gamma(q - 1, q - 1);
  for (Eigen::Index i = 0; i < q - 1; ++i)
    for (Eigen::Index j = i; j < q - 1; ++j) {
      const double r = cov(i, j + 1) / std::sqrt(cov(i, i) * cov(j + 1, j + 1));
      gamma(i, j) = gamma(j, i) = r;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma, Eigen::EigenvaluesOnly);
  Eigen::VectorXd v = eig.eigenvalues().cwiseAbs();
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace

TEST_CASE("full rank truncation keeps gamma") {
  const Eigen::MatrixXd g = random_symmetric(12, 1);
  const Eigen::MatrixXd t = truncate_rank(GammaMatrix(g), 12);
  CHECK((t - g).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("rank one input is its own rank one truncation") {
  Eigen::VectorXd u(6);
  u << 0.3, -1.2, 0.5, 2.0, 0.0, -0.7;
  const Eigen::MatrixXd g = u * u.transpose();
  CHECK((truncate_rank(GammaMatrix(g), 1) - g).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("truncation rank out of range") {
  const GammaMatrix g(random_symmetric(5, 2));
  CHECK_THROWS_AS(truncate_rank(g, 0), InvalidInput);
  CHECK_THROWS_AS(truncate_rank(g, 6), InvalidInput);
}

TEST_CASE("Eckart-Young against random rank-3 competitors") {
  const Eigen::MatrixXd g = random_symmetric(20, 3);
  const Eigen::MatrixXd g3 = truncate_rank(GammaMatrix(g), 3);
  const double best = (g - g3).norm();
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a(20, 3);
    Eigen::MatrixXd b(20, 3);
    for (Eigen::Index i = 0; i < 20; ++i)
      for (Eigen::Index k = 0; k < 3; ++k) {
        a(i, k) = standard_normal(rng);
        b(i, k) = standard_normal(rng);
      }
    // Half of the competitors are perturbations of the optimum.
    Eigen::MatrixXd m = a * b.transpose();
    if (trial % 2 == 1) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(g3, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::MatrixXd u = svd.matrixU().leftCols(3) + 0.01 * a;
      m = u * svd.singularValues().head(3).asDiagonal() * svd.matrixV().leftCols(3).transpose();
    }
    CHECK(best <= (g - m).norm() + 1e-8);
  }
}

TEST_CASE("truncation properties") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const Eigen::MatrixXd g = random_symmetric(15, seed);
    const ScreeValues s = scree(GammaMatrix(g));
    for (int r : {1, 4, 9}) {
      const Eigen::MatrixXd t = truncate_rank(GammaMatrix(g), r);
      CHECK(t == t.transpose());
      const Eigen::VectorXd ts = scree(t).values;
      for (Eigen::Index i = r; i < ts.size(); ++i) CHECK(ts(i) <= 1e-8 * ts(0));
      const double discarded = s.values.tail(15 - r).squaredNorm();
      CHECK(std::abs((g - t).squaredNorm() - discarded) <= 1e-8 * discarded);
    }
  }
}

TEST_CASE("scree values") {
  CHECK(scree(Eigen::MatrixXd::Zero(4, 4)).values.isZero(0.0));
  CHECK((scree(Eigen::MatrixXd::Identity(5, 5)).values.array() - 1.0).abs().maxCoeff() <= 1e-14);
  Eigen::MatrixXd d = Eigen::Vector3d(3, 2, -4).asDiagonal();
  const Eigen::VectorXd s = scree(d).values;
  CHECK(s(0) == doctest::Approx(4.0));
  CHECK(s(1) == doctest::Approx(3.0));
  CHECK(s(2) == doctest::Approx(2.0));
}

TEST_CASE("Cattell finds the step") {
  const ScreeValues s = make_scree({10, 9.5, 9, 0.1, 0.1, 0.1, 0.1, 0.1});
  for (int r_max = 2; r_max <= 7; ++r_max) {
    const RankSelection sel = select_rank_cattell(s, r_max);
    CHECK(sel.method == RankMethod::cattell);
    CHECK(sel.trace.size() == static_cast<std::size_t>(r_max));
    CHECK(sel.r == cattell_oracle(s.values, r_max));
    if (r_max >= 3) CHECK(sel.r == 3);
  }
}

TEST_CASE("Cattell on a line picks the smallest breakpoint") {
  const ScreeValues s = make_scree({9, 8, 7, 6, 5, 4, 3, 2, 1, 0});
  CHECK(select_rank_cattell(s, 6).r == 1);
}

TEST_CASE("Cattell agrees with the exhaustive scan on random scree curves") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index len = 6 + trial % 30;
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = std::abs(standard_normal(rng)) * (i < 3 ? 10.0 : 1.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    const int r_max = 2 + trial % static_cast<int>(len - 2);
    CHECK(select_rank_cattell({v}, r_max).r == cattell_oracle(v, r_max));
  }
}

TEST_CASE("Cattell is scale invariant") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(25);
    for (Eigen::Index i = 0; i < 25; ++i) v(i) = std::abs(standard_normal(rng)) * (i < 4 ? 6.0 : 1.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    const int r = select_rank_cattell({v}, 8).r;
    CHECK(select_rank_cattell({Eigen::VectorXd(v * 37.5)}, 8).r == r);
    CHECK(select_rank_cattell({Eigen::VectorXd(v * 0.002)}, 8).r == r);
  }
}

TEST_CASE("Cattell argument checks") {
  CHECK_THROWS_AS(select_rank_cattell(make_scree({3, 2, 1}), 2), InvalidInput);
  const ScreeValues s = make_scree({5, 4, 3, 2, 1});
  CHECK_THROWS_AS(select_rank_cattell(s, 1), InvalidInput);
  CHECK_THROWS_AS(select_rank_cattell(s, 5), InvalidInput);
  CHECK_NOTHROW(select_rank_cattell(s, 4));
}

TEST_CASE("default r_max") {
  CHECK(default_rank_max(30, 500) == 29);
  CHECK(default_rank_max(30, 10) == 8);
  CHECK(default_rank_max(500, 1000) == 50);
  CHECK(default_rank_max(2, 100) == 2);
}

TEST_CASE("type 7 quantile") {
  std::vector<double> v{4, 1, 3, 2};
  CHECK(empirical_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile(v, 0.95) == doctest::Approx(3.85));
  CHECK(empirical_quantile(v, 1.0) == 4.0);
  std::vector<double> one{7.0};
  CHECK(empirical_quantile(one, 0.3) == 7.0);
  std::vector<double> none;
  CHECK_THROWS_AS(empirical_quantile(none, 0.5), InvalidInput);
}

TEST_CASE("parallel analysis matches a one-loop reference") {
  const Eigen::MatrixXd x = random_observations(25, 12, 31);
  const ParallelAnalysisConfig cfg{20, 0.9, 77};
  const RankSelection sel = select_rank_pa(ObservationMatrix(x), cfg);

  const Eigen::VectorXd observed = oracle_scree(x);
  std::vector<Eigen::VectorXd> reps;
  for (int rep = 0; rep < cfg.n_perm; ++rep) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    Eigen::MatrixXd shuffled = x;
    for (Eigen::Index c = 0; c < shuffled.cols(); ++c)
      shuffle(std::span<double>(shuffled.col(c).data(), static_cast<std::size_t>(shuffled.rows())), rng);
    reps.push_back(oracle_scree(shuffled));
  }
  int r = 0;
  bool running = true;
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    std::vector<double> column;
    for (const auto& s : reps) column.push_back(s(i));
    std::sort(column.begin(), column.end());
    const double h = 0.9 * static_cast<double>(column.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const double q = column[lo] + (h - static_cast<double>(lo)) * (column[std::min(lo + 1, column.size() - 1)] - column[lo]);
    CHECK(std::abs(sel.trace[static_cast<std::size_t>(i)] - q) <= 1e-10);
    if (running && observed(i) > q) {
      ++r;
    } else {
      running = false;
    }
  }
  CHECK(sel.r == std::max(1, r));
  CHECK(sel.method == RankMethod::pa);
  // Independent columns: little structure to retain.
  CHECK(sel.r <= 3);
}

TEST_CASE("parallel analysis with one replicate and quantile one") {
  const Eigen::MatrixXd x = random_observations(15, 8, 32);
  const RankSelection sel = select_rank_pa(ObservationMatrix(x), {1, 1.0, 5});
  Rng rng(derive_seed(5, 0));
  Eigen::MatrixXd shuffled = x;
  for (Eigen::Index c = 0; c < shuffled.cols(); ++c)
    shuffle(std::span<double>(shuffled.col(c).data(), static_cast<std::size_t>(shuffled.rows())), rng);
  const Eigen::VectorXd permuted = oracle_scree(shuffled);
  const Eigen::VectorXd observed = oracle_scree(x);
  int r = 0;
  while (r < observed.size() && observed(r) > permuted(r)) ++r;
  CHECK(sel.r == std::max(1, r));
  for (Eigen::Index i = 0; i < permuted.size(); ++i)
    CHECK(std::abs(sel.trace[static_cast<std::size_t>(i)] - permuted(i)) <= 1e-10);
}

TEST_CASE("parallel analysis is bit reproducible and validates its config") {
  const ObservationMatrix x(random_observations(20, 10, 33));
  const auto a = select_rank_pa(x, {10, 0.95, 8});
  const auto b = select_rank_pa(x, {10, 0.95, 8});
  CHECK(a.r == b.r);
  CHECK(a.trace == b.trace);
  CHECK_THROWS_AS(select_rank_pa(x, {0, 0.95, 8}), InvalidInput);
  CHECK_THROWS_AS(select_rank_pa(x, {10, 0.0, 8}), InvalidInput);
  CHECK_THROWS_AS(select_rank_pa(x, {10, 1.5, 8}), InvalidInput);
}

TEST_CASE("both criteria find five factors on extra-diagonal-unequal, q = 500, n = 30") {
  const GroundTruth truth = build_scenario({ScenarioKind::extra_diagonal_unequal, 500, 1});
  const ObservationMatrix x(sample_gaussian(truth.sigma, 30, 2));
  const ScreeValues s = scree(build_gamma(sample_correlation(x)));
  CHECK(select_rank_cattell(s, default_rank_max(30, 500)).r == 5);
  CHECK(select_rank_pa(x, {50, 0.95, 3}).r == 5);
}
