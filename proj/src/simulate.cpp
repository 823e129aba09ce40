#include "blockcov/simulate.hpp"

#include "blockcov/errors.hpp"
#include "blockcov/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace blockcov {
namespace {

constexpr std::array<double, kScenarioFactors> kEqualSquares{0.7, 0.75, 0.65, 0.8, 0.7};
constexpr double kExtraLoading = -0.5;

struct ScenarioTraits {
  bool extra_diagonal;
  bool unequal;
};

ScenarioTraits traits(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::diagonal_equal:
      return {false, false};
    case ScenarioKind::diagonal_unequal:
      return {false, true};
    case ScenarioKind::extra_diagonal_equal:
      return {true, false};
    case ScenarioKind::extra_diagonal_unequal:
      return {true, true};
  }
  return {false, false};
}

}  // namespace

ScenarioKind parse_scenario(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "diagonal-equal") return ScenarioKind::diagonal_equal;
  if (s == "diagonal-unequal") return ScenarioKind::diagonal_unequal;
  if (s == "extra-diagonal-equal") return ScenarioKind::extra_diagonal_equal;
  if (s == "extra-diagonal-unequal") return ScenarioKind::extra_diagonal_unequal;
  std::string valid;
  for (const auto& n : scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidInput("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")");
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::diagonal_equal:
      return "diagonal-equal";
    case ScenarioKind::diagonal_unequal:
      return "diagonal-unequal";
    case ScenarioKind::extra_diagonal_equal:
      return "extra-diagonal-equal";
    case ScenarioKind::extra_diagonal_unequal:
      return "extra-diagonal-unequal";
  }
  return "unknown";
}

std::vector<std::string> scenario_names() {
  return {"diagonal-equal", "diagonal-unequal", "extra-diagonal-equal", "extra-diagonal-unequal"};
}

std::array<int, kScenarioFactors> block_sizes(int q) {
  constexpr std::array<double, kScenarioFactors - 1> kFractions{0.1, 0.2, 0.3, 0.2};
  std::array<int, kScenarioFactors> sizes{};
  int used = 0;
  for (std::size_t c = 0; c < kFractions.size(); ++c) {
    sizes[c] = static_cast<int>(std::lround(kFractions[c] * q));
    used += sizes[c];
  }
  sizes.back() = q - used;
  for (int s : sizes) {
    if (s <= 0) {
      throw InvalidInput("scenario with q = " + std::to_string(q) + " has an empty block");
    }
  }
  return sizes;
}

std::pair<int, int> extra_diagonal_rows(int q) {
  return {static_cast<int>(std::lround(0.35 * q)) - 1, static_cast<int>(std::lround(0.45 * q)) - 1};
}

GroundTruth build_scenario(const ScenarioSpec& spec) {
  if (spec.q < 10) {
    throw InvalidInput("scenarios need q >= 10, got " + std::to_string(spec.q));
  }
  const int q = spec.q;
  const auto sizes = block_sizes(q);
  const ScenarioTraits t = traits(spec.kind);
  Rng rng(spec.seed);

  GroundTruth truth;
  truth.z = Eigen::MatrixXd::Zero(q, kScenarioFactors);
  // Intended squares of the loadings; used when two rows share a loading so
  // that Equal scenarios reproduce the nominal values (0.7, ...) exactly.
  Eigen::MatrixXd squares = Eigen::MatrixXd::Zero(q, kScenarioFactors);
  truth.blocks.assign(static_cast<std::size_t>(q), 0);

  int start = 0;
  for (int c = 0; c < kScenarioFactors; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    for (int i = start; i < start + sizes[uc]; ++i) {
      truth.blocks[static_cast<std::size_t>(i)] = c;
      if (t.unequal) {
        const double lo = c == 2 ? std::sqrt(0.3) : std::sqrt(0.6);
        const double hi = c == 2 ? std::sqrt(0.6) : std::sqrt(0.8);
        const double v = uniform(lo, hi, rng);
        truth.z(i, c) = v;
        squares(i, c) = v * v;
      } else {
        truth.z(i, c) = std::sqrt(kEqualSquares[uc]);
        squares(i, c) = kEqualSquares[uc];
      }
    }
    start += sizes[uc];
  }
  if (t.extra_diagonal) {
    const auto [lo, hi] = extra_diagonal_rows(q);
    for (int i = lo; i <= hi; ++i) {
      truth.z(i, 3) = kExtraLoading;
      squares(i, 3) = kExtraLoading * kExtraLoading;
    }
  }

  truth.sigma.resize(q, q);
  for (int j = 0; j < q; ++j) {
    for (int i = j; i < q; ++i) {
      double sum = 0.0;
      for (int c = 0; c < kScenarioFactors; ++c) {
        const double a = truth.z(i, c);
        const double b = truth.z(j, c);
        sum += (a == b) ? squares(i, c) : a * b;
      }
      truth.sigma(i, j) = sum;
      truth.sigma(j, i) = sum;
    }
  }
  for (int i = 0; i < q; ++i) {
    if (truth.sigma(i, i) > 1.0) {
      throw InvalidInput("scenario loadings give diag(ZZ') > 1 at row " + std::to_string(i));
    }
    truth.sigma(i, i) = 1.0;
  }
  truth.support = truth.sigma.array().abs() > 1e-12;
  truth.support.matrix().diagonal().setConstant(false);
  return truth;
}

Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& sigma, int n, std::uint64_t seed) {
  if (n < 2) {
    throw InvalidInput("sample_gaussian needs n >= 2");
  }
  if (sigma.rows() != sigma.cols()) {
    throw InvalidInput("sample_gaussian needs a square covariance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of sigma failed");
  }
  const Eigen::MatrixXd& u = eig.eigenvectors();
  const Eigen::MatrixXd root = u * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * u.transpose();

  Rng rng(seed);
  Eigen::MatrixXd g(n, sigma.rows());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = standard_normal(rng);
  }
  return g * root;
}

std::pair<Eigen::MatrixXd, Permutation> permute_columns(const Eigen::MatrixXd& x, std::uint64_t seed) {
  Rng rng(seed);
  Permutation p{random_permutation(static_cast<int>(x.cols()), rng)};
  return {permute_columns_by(x, p), std::move(p)};
}

}  // namespace blockcov
