#pragma once

#include "clearn/bench.hpp"
#include "clearn/common.hpp"
#include "clearn/learn/scaler.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace clearn::learn {

enum class ModelKind { Linear, Tree, Forest, Boosted, Mlp };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

/// Binary tree node; a leaf has feature < 0. Points with z(feature) <= threshold
/// go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// Nodes are stored in preorder with the root at index 0.
struct Tree {
  std::vector<TreeNode> nodes;

  int leaf_index(const Eigen::Ref<const Vector>& z) const;
  double predict(const Eigen::Ref<const Vector>& z) const { return nodes[leaf_index(z)].value; }
  int depth() const;
  int num_leaves() const;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

/// Hidden layers use ReLU; the last layer is affine with one output.
struct Mlp {
  std::vector<DenseLayer> layers;

  double forward(const Eigen::Ref<const Vector>& z) const;
  int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
};

struct RegressorConfig {
  int trees = 10;
  int max_depth = 5;
  int max_features = 0;  // per split in forests; 0 means floor(sqrt(d)), at least 1
  bool bootstrap = true;
  double learning_rate = 0.1;
  std::vector<int> hidden{10, 10};
  int epochs = 1000;
  int batch_size = 32;
  double step_size = 1e-2;
};

/// Fitted surrogate. Learned parameters live in scaled space: inputs through
/// input_scaler (min-max to [0,1]) and targets through target_scaler
/// (standardized). predict() applies both maps.
struct TrainedRegressor {
  ModelKind kind = ModelKind::Linear;
  Scaler input_scaler;
  Scaler target_scaler;

  Vector linear_coef;
  double linear_intercept = 0.0;

  std::vector<Tree> trees;
  double base = 0.0;           // boosted initial value
  double learning_rate = 1.0;  // boosted stage weight

  Mlp mlp;

  int input_dim() const { return input_scaler.dim(); }

  /// Prediction in original units.
  double predict(const Eigen::Ref<const Vector>& x) const;
  /// Prediction in scaled target units from an already scaled input.
  double predict_scaled(const Eigen::Ref<const Vector>& z) const;
  Vector predict_rows(const Eigen::Ref<const Matrix>& inputs) const;
};

TrainedRegressor train_regressor(ModelKind kind, const RegressorConfig& config,
                                 const Eigen::Ref<const Matrix>& inputs,
                                 const Eigen::Ref<const Vector>& targets, std::uint64_t seed);

/// Trains on the dataset's noisy values.
TrainedRegressor train_regressor(ModelKind kind, const RegressorConfig& config,
                                 const bench::Dataset& dataset, std::uint64_t seed);

/// CART regression tree on already scaled data: greedy variance reduction,
/// midpoint thresholds, minimum leaf size 1. `rows` selects (with repetition)
/// the training rows; `max_features` > 0 samples that many candidate features
/// per split.
Tree fit_tree(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Vector>& t,
              const std::vector<int>& rows, int max_depth, int max_features,
              std::uint64_t seed);

/// 1 - SSE/SST. Throws UndefinedScoreError when targets have zero variance.
double r2_score(const TrainedRegressor& model, const Eigen::Ref<const Matrix>& inputs,
                const Eigen::Ref<const Vector>& targets);
double r2_score(const Eigen::Ref<const Vector>& predictions,
                const Eigen::Ref<const Vector>& targets);

}  // namespace clearn::learn
