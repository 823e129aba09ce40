#pragma once

#include "blockcov/corr_core.hpp"

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace blockcov {

/// order[i] is the original index placed at position i.
struct Permutation {
  std::vector<int> order;

  static Permutation identity(int size);
  Permutation inverse() const;
  int size() const { return static_cast<int>(order.size()); }
  bool is_valid() const;
};

enum class Dissimilarity { one_minus_corr, one_minus_abs_corr, euclidean_columns };

Dissimilarity parse_dissimilarity(std::string_view name);

/// one_minus_corr and one_minus_abs_corr read the correlation matrix.
Eigen::MatrixXd dissimilarity(const CorrelationMatrix& r, Dissimilarity kind);

/// euclidean_columns reads the raw observations.
Eigen::MatrixXd dissimilarity(const ObservationMatrix& x, Dissimilarity kind);

/// Node ids: leaves are 0..q-1, merge m creates node q + m.
struct Merge {
  int left;
  int right;
  double height;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;
};

/// Complete-linkage agglomerative clustering. Every cluster is keyed by its
/// smallest leaf; among equal distances the pair with the smallest
/// (left key, right key) merges first, and the left child is the cluster
/// with the smaller key.
Dendrogram hclust_complete(const Eigen::MatrixXd& d);

/// Depth-first, left child first.
Permutation leaf_order(const Dendrogram& tree);

/// Labels 0..k-1 after undoing the k-1 last merges, numbered by first
/// appearance in leaf_order.
std::vector<int> cut_tree(const Dendrogram& tree, int k);

/// Simultaneous row/column reordering: out(i, j) = m(p[i], p[j]); with
/// inverse the map is undone.
Eigen::MatrixXd permute_matrix(const Eigen::MatrixXd& m, const Permutation& p, bool inverse = false);

/// out.col(i) = x.col(p[i]).
Eigen::MatrixXd permute_columns_by(const Eigen::MatrixXd& x, const Permutation& p);

}  // namespace blockcov
