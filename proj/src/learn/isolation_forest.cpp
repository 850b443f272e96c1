#include "clearn/learn/isolation_forest.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <random>

namespace clearn::learn {

namespace {

class IsoBuilder {
 public:
  IsoBuilder(const Eigen::Ref<const Matrix>& x, int max_depth, std::mt19937_64& rng)
      : x_(x), max_depth_(max_depth), rng_(rng) {}

  IsolationTree build(std::vector<int> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  void grow(std::vector<int> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    IsoNode leaf;
    leaf.depth = depth;
    tree_.nodes.push_back(leaf);
    if (depth >= max_depth_ || rows.size() < 2) return;

    std::vector<int> varying;
    Vector lo(x_.cols()), hi(x_.cols());
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      lo(j) = hi(j) = x_(rows[0], j);
      for (int r : rows) {
        lo(j) = std::min(lo(j), x_(r, j));
        hi(j) = std::max(hi(j), x_(r, j));
      }
      if (lo(j) < hi(j)) varying.push_back(static_cast<int>(j));
    }
    if (varying.empty()) return;  // identical points cannot be isolated further

    std::uniform_int_distribution<std::size_t> pick(0, varying.size() - 1);
    const int f = varying[pick(rng_)];
    std::uniform_real_distribution<double> u(lo(f), hi(f));
    // u draws from [lo, hi); x <= t then leaves the max on the right.
    const double t = u(rng_);

    std::vector<int> left, right;
    for (int r : rows) (x_(r, f) <= t ? left : right).push_back(r);
    tree_.nodes[id].feature = f;
    tree_.nodes[id].threshold = t;
    tree_.nodes[id].left = static_cast<int>(tree_.nodes.size());
    grow(std::move(left), depth + 1);
    tree_.nodes[id].right = static_cast<int>(tree_.nodes.size());
    grow(std::move(right), depth + 1);
  }

  const Eigen::Ref<const Matrix>& x_;
  int max_depth_;
  std::mt19937_64& rng_;
  IsolationTree tree_;
};

}  // namespace

int IsolationTree::leaf_index(const Eigen::Ref<const Vector>& x) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    id = x(nodes[id].feature) <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return id;
}

int IsolationTree::max_leaf_depth() const {
  int best = 0;
  for (const IsoNode& n : nodes) {
    if (n.is_leaf()) best = std::max(best, n.depth);
  }
  return best;
}

IsolationForestModel train_isolation_forest(const Eigen::Ref<const Matrix>& inputs,
                                            const IsolationForestConfig& config,
                                            std::uint64_t seed) {
  const int n = static_cast<int>(inputs.rows());
  if (n < 1) throw ArgumentError("isolation forest needs at least one point");
  if (config.trees < 1 || config.max_depth < 0 || config.subsample < 1) {
    throw ConfigError("invalid isolation forest settings");
  }
  if (!inputs.allFinite()) throw DataError("non-finite isolation forest input");

  IsolationForestModel forest;
  forest.max_depth = config.max_depth;
  forest.dim = static_cast<int>(inputs.cols());
  forest.subsample = config.subsample;
  if (config.subsample > n) {
    std::clog << "warning: isolation forest subsample " << config.subsample
              << " exceeds " << n << " points; using " << n << '\n';
    forest.subsample = n;
    forest.subsample_clamped = true;
  }

  std::mt19937_64 rng(seed);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int k = 0; k < config.trees; ++k) {
    std::vector<int> rows = all;
    if (forest.subsample < n) {
      for (int i = 0; i < forest.subsample; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(rows[i], rows[pick(rng)]);
      }
      rows.resize(forest.subsample);
    }
    forest.trees.push_back(IsoBuilder(inputs, config.max_depth, rng).build(std::move(rows)));
  }
  return forest;
}

int path_length(const IsolationForestModel& forest, int tree_index,
                const Eigen::Ref<const Vector>& x) {
  if (tree_index < 0 || tree_index >= static_cast<int>(forest.trees.size())) {
    throw ArgumentError("tree index out of range");
  }
  if (x.size() != forest.dim) throw DimensionError("point dimension mismatch");
  const IsolationTree& tree = forest.trees[tree_index];
  return tree.nodes[tree.leaf_index(x)].depth;
}

}  // namespace clearn::learn
