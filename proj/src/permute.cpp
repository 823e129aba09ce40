#include "blockcov/permute.hpp"

#include "blockcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace blockcov {

Permutation Permutation::identity(int size) {
  Permutation p;
  p.order.resize(static_cast<std::size_t>(size));
  std::iota(p.order.begin(), p.order.end(), 0);
  return p;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.order.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inv.order[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  return inv;
}

bool Permutation::is_valid() const {
  std::vector<char> seen(order.size(), 0);
  for (int v : order) {
    if (v < 0 || static_cast<std::size_t>(v) >= order.size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

Dissimilarity parse_dissimilarity(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "one_minus_corr") return Dissimilarity::one_minus_corr;
  if (s == "one_minus_abs_corr") return Dissimilarity::one_minus_abs_corr;
  if (s == "euclidean_columns") return Dissimilarity::euclidean_columns;
  throw InvalidInput("unknown dissimilarity '" + std::string(name) +
                     "' (expected one_minus_corr, one_minus_abs_corr or euclidean_columns)");
}

Eigen::MatrixXd dissimilarity(const CorrelationMatrix& r, Dissimilarity kind) {
  Eigen::MatrixXd d;
  switch (kind) {
    case Dissimilarity::one_minus_corr:
      d = 1.0 - r.values().array();
      break;
    case Dissimilarity::one_minus_abs_corr:
      d = 1.0 - r.values().array().abs();
      break;
    case Dissimilarity::euclidean_columns:
      throw InvalidInput("euclidean_columns dissimilarity needs the observation matrix");
  }
  d.diagonal().setZero();
  return d;
}

Eigen::MatrixXd dissimilarity(const ObservationMatrix& x, Dissimilarity kind) {
  if (kind != Dissimilarity::euclidean_columns) {
    return dissimilarity(sample_correlation(x), kind);
  }
  const Eigen::MatrixXd& e = x.data();
  const Eigen::Index q = e.cols();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const double v = (e.col(i) - e.col(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Dendrogram hclust_complete(const Eigen::MatrixXd& d) {
  const Eigen::Index q = d.rows();
  if (q != d.cols() || q < 1) {
    throw InvalidInput("hclust needs a non-empty square dissimilarity matrix");
  }
  if (!d.allFinite()) {
    throw InvalidInput("hclust dissimilarity has non-finite entries");
  }
  if ((d.array() < 0.0).any() || d != d.transpose()) {
    throw InvalidInput("hclust dissimilarity must be symmetric and non-negative");
  }

  // Slot i holds the cluster whose smallest leaf is i.
  Eigen::MatrixXd dist = d;
  const auto n = static_cast<std::size_t>(q);
  std::vector<char> active(n, 1);
  std::vector<int> node(n);
  std::iota(node.begin(), node.end(), 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_best(n, kInf);
  std::vector<std::size_t> row_arg(n, n);

  auto refresh = [&](std::size_t i) {
    row_best[i] = kInf;
    row_arg[i] = n;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < row_best[i]) {
        row_best[i] = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        row_arg[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  Dendrogram tree;
  tree.leaves = static_cast<int>(q);
  tree.merges.reserve(n > 0 ? n - 1 : 0);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && row_arg[i] < n && (a == n || row_best[i] < row_best[a])) a = i;
    }
    const std::size_t b = row_arg[a];
    tree.merges.push_back({node[a], node[b], row_best[a]});
    node[a] = static_cast<int>(q) + static_cast<int>(step);
    active[b] = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      const auto ka = static_cast<Eigen::Index>(k);
      const double merged = std::max(dist(static_cast<Eigen::Index>(a), ka), dist(static_cast<Eigen::Index>(b), ka));
      dist(static_cast<Eigen::Index>(a), ka) = merged;
      dist(ka, static_cast<Eigen::Index>(a)) = merged;
    }
    refresh(a);
    for (std::size_t k = 0; k < b; ++k) {
      if (active[k] && k != a && (row_arg[k] == a || row_arg[k] == b)) refresh(k);
    }
  }
  return tree;
}

Permutation leaf_order(const Dendrogram& tree) {
  Permutation p;
  if (tree.leaves <= 0) return p;
  p.order.reserve(static_cast<std::size_t>(tree.leaves));
  if (tree.merges.empty()) {
    p.order.push_back(0);
    return p;
  }
  std::vector<int> stack{tree.leaves + static_cast<int>(tree.merges.size()) - 1};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (id < tree.leaves) {
      p.order.push_back(id);
      continue;
    }
    const Merge& m = tree.merges[static_cast<std::size_t>(id - tree.leaves)];
    stack.push_back(m.right);
    stack.push_back(m.left);
  }
  return p;
}

std::vector<int> cut_tree(const Dendrogram& tree, int k) {
  const int q = tree.leaves;
  if (k < 1 || k > q) {
    throw InvalidInput("cut_tree: k = " + std::to_string(k) + " outside 1.." + std::to_string(q));
  }
  std::vector<int> parent(static_cast<std::size_t>(q));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  // Any leaf below each internal node, to union through.
  std::vector<int> representative(tree.merges.size());
  auto leaf_of = [&](int id) { return id < q ? id : representative[static_cast<std::size_t>(id - q)]; };
  const std::size_t kept = static_cast<std::size_t>(q - k);
  for (std::size_t m = 0; m < tree.merges.size(); ++m) {
    const int l = leaf_of(tree.merges[m].left);
    representative[m] = l;
    if (m < kept) parent[static_cast<std::size_t>(find(l))] = find(leaf_of(tree.merges[m].right));
  }

  std::vector<int> labels(static_cast<std::size_t>(q), -1);
  std::vector<int> root_label(static_cast<std::size_t>(q), -1);
  int next = 0;
  for (int leaf : leaf_order(tree).order) {
    int& label = root_label[static_cast<std::size_t>(find(leaf))];
    if (label < 0) label = next++;
    labels[static_cast<std::size_t>(leaf)] = label;
  }
  return labels;
}

Eigen::MatrixXd permute_matrix(const Eigen::MatrixXd& m, const Permutation& p, bool inverse) {
  const Eigen::Index q = m.rows();
  if (m.cols() != q || p.size() != q) {
    throw InvalidInput("permute_matrix: permutation and matrix sizes differ");
  }
  Eigen::MatrixXd out(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const int pj = p.order[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < q; ++i) {
      const int pi = p.order[static_cast<std::size_t>(i)];
      if (inverse) {
        out(pi, pj) = m(i, j);
      } else {
        out(i, j) = m(pi, pj);
      }
    }
  }
  return out;
}

Eigen::MatrixXd permute_columns_by(const Eigen::MatrixXd& x, const Permutation& p) {
  if (p.size() != x.cols()) {
    throw InvalidInput("permute_columns_by: permutation and column count differ");
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) out.col(i) = x.col(p.order[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace blockcov
