#pragma once

#include "clearn/common.hpp"
#include "clearn/learn/isolation_forest.hpp"
#include "clearn/learn/regressor.hpp"
#include "clearn/milp/model.hpp"

#include <span>
#include <vector>

// Mixed-integer encodings of trained models.
//
// Trees: one binary per leaf with sum 1 per tree. Each split (feature j,
// threshold t in original units) contributes two aggregated big-M rows
//   x_j <= t     + M_L (1 - sum of left-subtree leaves)
//   x_j >= t + e - M_R (1 - sum of right-subtree leaves)
// with e = split_margin, so x_j = t goes left like the prediction routine.
// M_L and M_R come from the bounds of x_j.
//
// MLPs: scalers are folded into the first and last affine maps. A hidden
// neuron with pre-activation interval [l, u] is dropped when u <= 0, becomes a
// plain equality when l >= 0, and otherwise gets
//   a >= 0, a >= p, a <= p - l (1 - d), a <= u d,  d binary.
namespace clearn::embed {

struct EmbedOptions {
  double split_margin = 1e-9;
  /// Isolation-forest rows keep x this far (times max(1, max |x bound|))
  /// from every threshold on both sides, so traversal of the solution agrees
  /// with the selected leaves despite solver tolerances.
  double isofor_margin = 1e-6;
  /// Added to both ends of every propagated interval. Zero gives the tightest
  /// big-M values; positive values are only useful for testing.
  double bound_slack = 0.0;
};

struct EmbeddedOutput {
  int output = -1;               // variable equal to the prediction
  std::vector<int> binaries;     // leaf indicators or ReLU switches
  std::vector<int> continuous;   // ReLU activations
  int first_row = 0;             // constraint rows appended: [first_row, end_row)
  int end_row = 0;
  /// Leaf binaries per tree, aligned with each tree's node list (-1 for
  /// internal nodes). Empty for linear models and MLPs.
  std::vector<std::vector<int>> leaf_vars;
};

struct LayerBounds {
  Vector lower;
  Vector upper;
};

/// Interval propagation through an MLP in its own input units. Returns the
/// pre-activation interval of every layer, output layer included.
std::vector<LayerBounds> propagate_bounds(const learn::Mlp& mlp, const Box& input_box);

/// Same for a trained MLP regressor with a box in original input units.
std::vector<LayerBounds> propagate_bounds(const learn::TrainedRegressor& model, const Box& box);

/// Appends rows forcing a new output variable to equal predict(model, x).
/// Throws BoundError when an x variable is unbounded.
EmbeddedOutput embed_regressor(const learn::TrainedRegressor& model, std::span<const int> x_vars,
                               milp::MilpModel& milp, const EmbedOptions& options = {});

struct IsoforBlock {
  std::vector<std::vector<int>> leaf_vars;  // per tree, aligned with nodes
  int first_row = 0;
  int end_row = 0;
  /// Some tree has no leaf at depth >= d, so no x can satisfy the block.
  bool infeasible = false;
};

/// Requires every tree's leaf reached by x to have depth >= d.
IsoforBlock embed_isofor_depth(const learn::IsolationForestModel& forest,
                               std::span<const int> x_vars, int depth, milp::MilpModel& milp,
                               const EmbedOptions& options = {});

}  // namespace clearn::embed
