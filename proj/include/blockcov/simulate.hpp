#pragma once

#include "blockcov/corr_core.hpp"
#include "blockcov/permute.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blockcov {

enum class ScenarioKind { diagonal_equal, diagonal_unequal, extra_diagonal_equal, extra_diagonal_unequal };

ScenarioKind parse_scenario(std::string_view name);
std::string scenario_name(ScenarioKind kind);
std::vector<std::string> scenario_names();

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::diagonal_equal;
  int q = 100;
  std::uint64_t seed = 1;
};

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct GroundTruth {
  Eigen::MatrixXd z;      // q x 5
  Eigen::MatrixXd sigma;  // Z Z' + D, unit diagonal
  SupportMask support;    // |sigma(i, j)| > 1e-12 off the diagonal
  std::vector<int> blocks;  // 0..4, from the consecutive column supports of Z
};

inline constexpr int kScenarioFactors = 5;

/// Sizes round(0.1q), round(0.2q), round(0.3q), round(0.2q) and the remainder.
std::array<int, kScenarioFactors> block_sizes(int q);

/// Zero-based inclusive row range carrying the extra -0.5 loadings of the
/// fourth factor: 1-based rows round(0.35q) .. round(0.45q).
std::pair<int, int> extra_diagonal_rows(int q);

GroundTruth build_scenario(const ScenarioSpec& spec);

/// Rows are Sigma^{1/2} g with g standard normal, Sigma^{1/2} from the
/// symmetric eigendecomposition with negative eigenvalues clipped.
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& sigma, int n, std::uint64_t seed);

/// Uniformly random column permutation; returns the permuted data and p with
/// result.col(i) = x.col(p.order[i]).
std::pair<Eigen::MatrixXd, Permutation> permute_columns(const Eigen::MatrixXd& x, std::uint64_t seed);

}  // namespace blockcov
