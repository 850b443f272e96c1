#pragma once

#include "clearn/common.hpp"

#include <cstdint>
#include <vector>

namespace clearn::learn {

struct IsoNode {
  int feature = -1;  // < 0 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;

  bool is_leaf() const { return feature < 0; }
};

/// Points with x(feature) <= threshold go left. Root at index 0.
struct IsolationTree {
  std::vector<IsoNode> nodes;

  int leaf_index(const Eigen::Ref<const Vector>& x) const;
  int max_leaf_depth() const;
};

struct IsolationForestConfig {
  int trees = 10;
  int max_depth = 6;
  int subsample = 256;
};

struct IsolationForestModel {
  std::vector<IsolationTree> trees;
  int subsample = 0;
  int max_depth = 0;
  int dim = 0;
  bool subsample_clamped = false;
};

/// Each tree is grown on a subsample drawn without replacement: a uniformly
/// random feature (among those that vary in the node) and a uniform threshold
/// inside the node's range, until max_depth or a node holds a single distinct
/// point. Trees work on raw inputs. A subsample larger than N is clamped to N
/// with a warning on std::clog.
IsolationForestModel train_isolation_forest(const Eigen::Ref<const Matrix>& inputs,
                                            const IsolationForestConfig& config,
                                            std::uint64_t seed);

/// Edge count from the root to the leaf reached by x.
int path_length(const IsolationForestModel& forest, int tree_index,
                const Eigen::Ref<const Vector>& x);

}  // namespace clearn::learn
