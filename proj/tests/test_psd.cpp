#include "blockcov/errors.hpp"
#include "blockcov/psd.hpp"
#include "blockcov/random.hpp"
#include "blockcov/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace blockcov;

namespace {

Eigen::MatrixXd random_correlation_like(Eigen::Index q, std::uint64_t seed, double spread) {
  Rng rng(seed);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < j; ++i) a(i, j) = a(j, i) = uniform(-spread, spread, rng);
  return a;
}

Eigen::MatrixXd random_pd_correlation(Eigen::Index q, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd b(q, q + 5);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = standard_normal(rng);
  Eigen::MatrixXd s = b * b.transpose();
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  s = d.asDiagonal() * s * d.asDiagonal();
  s.diagonal().setOnes();
  return 0.5 * (s + s.transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Naive repair: clip negative eigenvalues, then rescale to unit diagonal.
Eigen::MatrixXd clip_and_rescale(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  Eigen::MatrixXd c = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd d = c.diagonal().cwiseSqrt().cwiseInverse();
  c = d.asDiagonal() * c * d.asDiagonal();
  c.diagonal().setOnes();
  return c;
}

}  // namespace

TEST_CASE("PD correlation matrices are fixed points") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd a = random_pd_correlation(12, seed);
    const auto out = nearest_correlation(a);
    CHECK((out.values() - a).norm() <= 1e-6);
  }
  const auto id = nearest_correlation(Eigen::MatrixXd::Identity(7, 7));
  CHECK(id.values() == Eigen::MatrixXd::Identity(7, 7));
}

TEST_CASE("indefinite 3x3 example beats the clip-and-rescale repair") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  REQUIRE(min_eigenvalue(a) < 0.0);
  const Eigen::MatrixXd out = nearest_correlation(a).values();
  for (int i = 0; i < 3; ++i) CHECK(out(i, i) == 1.0);
  CHECK(min_eigenvalue(out) >= 0.0);
  // The input is symmetric under a signed permutation, so the naive repair
  // already lands on the optimum; the projection must match it.
  Eigen::MatrixXd optimum(3, 3);
  optimum << 1, 0.5, -0.5, 0.5, 1, 0.5, -0.5, 0.5, 1;
  CHECK((out - optimum).norm() <= 1e-6);
  CHECK((out - a).norm() <= (clip_and_rescale(a) - a).norm() + 1e-6);
}

TEST_CASE("projection improves strictly on clip-and-rescale for a generic indefinite input") {
  Eigen::MatrixXd a(4, 4);
  a << 1, 0.9, -0.6, 0.2, 0.9, 1, 0.7, -0.3, -0.6, 0.7, 1, 0.8, 0.2, -0.3, 0.8, 1;
  REQUIRE(min_eigenvalue(a) < 0.0);
  const Eigen::MatrixXd out = nearest_correlation(a).values();
  CHECK((out - a).norm() < (clip_and_rescale(a) - a).norm() - 1e-6);
}

TEST_CASE("output invariants on perturbed inputs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd a = random_correlation_like(25, 50 + seed, 0.9);
    const auto res = nearest_correlation_traced(a);
    const Eigen::MatrixXd& m = res.matrix.values();
    CHECK(m == m.transpose());
    for (Eigen::Index i = 0; i < m.rows(); ++i) CHECK(m(i, i) == 1.0);
    CHECK(min_eigenvalue(m) >= -1e-8);
    CHECK(res.iterations >= 1);
    CHECK(res.final_change <= PsdConfig{}.tol);
    CHECK(res.distance_to_input.size() == static_cast<std::size_t>(res.iterations));
  }
}

// Dykstra's iterates start at the input and move outward: the distance to
// the input grows monotonically towards the distance of the limit point.
TEST_CASE("distance of the iterates to the input is monotone") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd a = random_correlation_like(20, 80 + seed, 0.8);
    const auto res = nearest_correlation_traced(a);
    const auto& d = res.distance_to_input;
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] >= d[k - 1] - 1e-12);
    CHECK(std::abs(d.back() - (res.matrix.values() - a).norm()) <= 1e-4 * d.back());
  }
}

TEST_CASE("projection is no farther than feasible competitors") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd a = random_correlation_like(10, 200 + seed, 0.9);
    const double best = (nearest_correlation(a).values() - a).norm();
    CHECK(best <= (clip_and_rescale(a) - a).norm() + 1e-9);
    CHECK(best <= (Eigen::MatrixXd::Identity(10, 10) - a).norm() + 1e-9);
    for (std::uint64_t k = 0; k < 5; ++k) {
      CHECK(best <= (random_pd_correlation(10, 1000 * seed + k) - a).norm() + 1e-9);
    }
  }
}

TEST_CASE("iteration cap raises a convergence error with the last iterate") {
  const Eigen::MatrixXd a = random_correlation_like(15, 3, 0.95);
  PsdConfig cfg;
  cfg.max_iter = 2;
  try {
    nearest_correlation(a, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.achieved_change() > cfg.tol);
    CHECK(e.last_iterate().rows() == 15);
    CHECK(e.last_iterate().diagonal().isOnes(0.0));
  }
}

TEST_CASE("argument validation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  a(0, 1) = 0.5;
  CHECK_THROWS_AS(nearest_correlation(a), InvalidInput);
  CHECK_THROWS_AS(nearest_correlation(Eigen::MatrixXd::Identity(2, 3)), InvalidInput);
  PsdConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(nearest_correlation(Eigen::MatrixXd::Identity(3, 3), bad), InvalidInput);
  bad = PsdConfig{};
  bad.max_iter = 0;
  CHECK_THROWS_AS(nearest_correlation(Eigen::MatrixXd::Identity(3, 3), bad), InvalidInput);
  bad = PsdConfig{};
  bad.eig_floor = -1.0;
  CHECK_THROWS_AS(nearest_correlation(Eigen::MatrixXd::Identity(3, 3), bad), InvalidInput);
}

TEST_CASE("inverse square root examples") {
  CHECK((inv_sqrt(Eigen::MatrixXd::Identity(4, 4), 0.5).matrix - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-14);

  // Eigenvalues 4 and 0.04 on a rotated basis.
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  Eigen::Matrix2d u;
  u << c, -s, s, c;
  const Eigen::MatrixXd m = u * Eigen::Vector2d(4.0, 0.04).asDiagonal() * u.transpose();
  const InvSqrtResult r = inv_sqrt(m, 0.1);
  CHECK(r.kept == 1);
  CHECK(r.dropped == 1);
  const Eigen::MatrixXd expected = u * Eigen::Vector2d(0.5, 0.0).asDiagonal() * u.transpose();
  CHECK((r.matrix - expected).norm() <= 1e-12);
  CHECK(r.matrix == r.matrix.transpose());
  CHECK_THROWS_AS(inv_sqrt(m, -0.1), InvalidInput);
}

TEST_CASE("exact inverse square root whitens the true sigma") {
  const GroundTruth truth = build_scenario({ScenarioKind::diagonal_equal, 100, 1});
  REQUIRE(min_eigenvalue(truth.sigma) > 0.1);
  const InvSqrtResult r = inv_sqrt(truth.sigma, 0.1);
  CHECK(r.dropped == 0);
  CHECK(whitening_error(r.matrix, truth.sigma) <= 1e-8);
}

TEST_CASE("squared inverse root is the inverse for PD input") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd m = random_pd_correlation(10, 300 + seed);
    const Eigen::MatrixXd w = inv_sqrt(m, 0.0).matrix;
    const Eigen::MatrixXd inv = m.inverse();
    CHECK((w * w - inv).norm() <= 1e-6 * inv.norm());
  }
}

TEST_CASE("inverse square root depends only on the spectral projectors") {
  const Eigen::MatrixXd m = random_pd_correlation(8, 400);
  const Eigen::MatrixXd w = inv_sqrt(m, 0.2).matrix;
  // Rebuild from an independently computed decomposition with flipped signs.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::MatrixXd u = eig.eigenvectors();
  for (Eigen::Index k = 0; k < u.cols(); k += 2) u.col(k) *= -1.0;
  Eigen::VectorXd d = eig.eigenvalues();
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = d(k) > 0.2 ? 1.0 / std::sqrt(d(k)) : 0.0;
  const Eigen::MatrixXd rebuilt = u * d.asDiagonal() * u.transpose();
  CHECK((w - rebuilt).norm() <= 1e-10);
}

TEST_CASE("whitening error examples") {
  CHECK(whitening_error(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)) == 0.0);
  const Eigen::MatrixXd sigma = Eigen::Vector2d(2.0, 1.0).asDiagonal();
  CHECK(whitening_error(Eigen::MatrixXd::Identity(2, 2), sigma) == doctest::Approx(1.0));
  CHECK_THROWS_AS(whitening_error(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)), InvalidInput);
}
