#include "clearn/embed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clearn::embed {

namespace {

using milp::LinearExpr;
using milp::MilpModel;
using milp::RowSense;
using milp::Term;
using learn::DenseLayer;

Box variable_box(const MilpModel& m, std::span<const int> x_vars) {
  Box box(Vector(x_vars.size()), Vector(x_vars.size()));
  for (std::size_t j = 0; j < x_vars.size(); ++j) {
    const milp::Variable& v = m.variable(x_vars[j]);
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw BoundError("input variable '" + v.name + "' needs finite bounds for big-M");
    }
    box.lower(j) = v.lower;
    box.upper(j) = v.upper;
  }
  return box;
}

// Preorder layout: the subtree of node i occupies [i, end[i]).
template <typename Node>
std::vector<int> subtree_ends(const std::vector<Node>& nodes) {
  std::vector<int> end(nodes.size());
  for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
    end[i] = nodes[i].is_leaf() ? i + 1 : end[nodes[i].right];
  }
  return end;
}

// One-hot leaf encoding with aggregated per-split big-M rows. `allowed`
// filters leaves; leaves it rejects get no variable (equivalent to fixing
// their indicator to zero). Returns the leaf variable per node, -1 elsewhere.
template <typename Node, typename ThresholdFn, typename AllowedFn>
std::vector<int> embed_tree(const std::vector<Node>& nodes, std::span<const int> x_vars,
                            const Box& box, MilpModel& m, ThresholdFn threshold,
                            AllowedFn allowed, double margin, double left_margin,
                            const std::string& prefix) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> leaf_var(n, -1);
  std::vector<Term> one_hot;
  for (int i = 0; i < n; ++i) {
    if (!nodes[i].is_leaf() || !allowed(i)) continue;
    leaf_var[i] = m.add_binary(prefix + "_leaf" + std::to_string(i));
    one_hot.push_back({leaf_var[i], 1.0});
  }
  if (one_hot.empty()) {
    // No admissible leaf: make the block infeasible explicitly.
    const int dead = m.add_variable(prefix + "_empty", 0.0, 0.0);
    m.add_constraint({{dead, 1.0}}, RowSense::Equal, 1.0, prefix + "_no_leaf");
    return leaf_var;
  }
  m.add_constraint(one_hot, RowSense::Equal, 1.0, prefix + "_onehot");

  const std::vector<int> end = subtree_ends(nodes);
  auto leaves_in = [&](int root) {
    std::vector<int> out;
    for (int k = root; k < end[root]; ++k) {
      if (leaf_var[k] >= 0) out.push_back(leaf_var[k]);
    }
    return out;
  };
  for (int i = 0; i < n; ++i) {
    if (nodes[i].is_leaf()) continue;
    const int j = nodes[i].feature;
    const int x = x_vars[j];
    const double t = threshold(i);
    const std::vector<int> left = leaves_in(nodes[i].left);
    const std::vector<int> right = leaves_in(nodes[i].right);
    // x_j + M_L * sum(left) <= t - e_L + M_L
    const double ml = box.upper(j) - t + left_margin;
    if (ml > 0.0 && !left.empty()) {
      std::vector<Term> row{{x, 1.0}};
      for (int v : left) row.push_back({v, ml});
      m.add_constraint(std::move(row), RowSense::LessEqual, t - left_margin + ml,
                       prefix + "_L" + std::to_string(i));
    }
    // x_j - M_R * sum(right) >= t + e - M_R
    const double mr = t + margin - box.lower(j);
    if (mr > 0.0 && !right.empty()) {
      std::vector<Term> row{{x, 1.0}};
      for (int v : right) row.push_back({v, -mr});
      m.add_constraint(std::move(row), RowSense::GreaterEqual, t + margin - mr,
                       prefix + "_R" + std::to_string(i));
    }
  }
  return leaf_var;
}

EmbeddedOutput embed_linear(const learn::TrainedRegressor& model, std::span<const int> x_vars,
                            MilpModel& m, const std::string& prefix) {
  const double st = model.target_scaler.scale(0), ot = model.target_scaler.offset(0);
  EmbeddedOutput out;
  out.output = m.add_variable(prefix + "_y", -milp::kInf, milp::kInf);
  LinearExpr row = LinearExpr::variable(out.output);
  double constant = model.linear_intercept;
  for (std::size_t j = 0; j < x_vars.size(); ++j) {
    const double c = model.linear_coef(j) / model.input_scaler.scale(j);
    row.add(x_vars[j], -st * c);
    constant -= c * model.input_scaler.offset(j);
  }
  m.add_constraint(row, RowSense::Equal, ot + st * constant, prefix + "_linear");
  return out;
}

EmbeddedOutput embed_trees(const learn::TrainedRegressor& model, std::span<const int> x_vars,
                           const Box& box, MilpModel& m, const EmbedOptions& options,
                           const std::string& prefix) {
  const double st = model.target_scaler.scale(0), ot = model.target_scaler.offset(0);
  double base = 0.0, weight = 1.0;
  if (model.kind == learn::ModelKind::Forest) weight = 1.0 / static_cast<double>(model.trees.size());
  if (model.kind == learn::ModelKind::Boosted) {
    base = model.base;
    weight = model.learning_rate;
  }

  EmbeddedOutput out;
  std::vector<Term> sum;
  double constant = base, lo = base, hi = base;
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    const auto& nodes = model.trees[k].nodes;
    if (nodes.size() == 1) {
      constant += weight * nodes[0].value;
      lo += weight * nodes[0].value;
      hi += weight * nodes[0].value;
      out.leaf_vars.emplace_back(1, -1);
      continue;
    }
    auto threshold = [&](int i) {
      const int f = nodes[i].feature;
      return model.input_scaler.offset(f) + nodes[i].threshold * model.input_scaler.scale(f);
    };
    const std::vector<int> leaves =
        embed_tree(nodes, x_vars, box, m, threshold, [](int) { return true; }, options.split_margin, 0.0,
                   prefix + "_t" + std::to_string(k));
    double tmin = milp::kInf, tmax = -milp::kInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (leaves[i] < 0) continue;
      sum.push_back({leaves[i], weight * nodes[i].value});
      out.binaries.push_back(leaves[i]);
      tmin = std::min(tmin, nodes[i].value);
      tmax = std::max(tmax, nodes[i].value);
    }
    lo += weight * std::min(tmin, tmax);
    hi += weight * std::max(tmin, tmax);
    out.leaf_vars.push_back(leaves);
  }
  if (weight < 0.0) std::swap(lo, hi);
  const double pad = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  out.output = m.add_variable(prefix + "_y", ot + st * lo - st * pad, ot + st * hi + st * pad);
  std::vector<Term> row{{out.output, 1.0}};
  for (const Term& t : sum) row.push_back({t.var, -st * t.coef});
  m.add_constraint(std::move(row), RowSense::Equal, ot + st * constant, prefix + "_ensemble");
  return out;
}

EmbeddedOutput embed_mlp(const learn::TrainedRegressor& model, std::span<const int> x_vars,
                         const Box& box, MilpModel& m, const EmbedOptions& options,
                         const std::string& prefix) {
  const std::vector<LayerBounds> bounds = propagate_bounds(model, box);
  const double st = model.target_scaler.scale(0), ot = model.target_scaler.offset(0);
  EmbeddedOutput out;

  // Scaled inputs as affine expressions of x.
  std::vector<LinearExpr> act;
  for (std::size_t j = 0; j < x_vars.size(); ++j) {
    const double s = model.input_scaler.scale(j);
    act.emplace_back(std::vector<Term>{{x_vars[j], 1.0 / s}}, -model.input_scaler.offset(j) / s);
  }

  const auto& layers = model.mlp.layers;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    std::vector<LinearExpr> next;
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      LinearExpr pre({}, layer.bias(i));
      for (std::size_t k = 0; k < act.size(); ++k) {
        if (layer.weights(i, k) != 0.0) pre.add(act[k], layer.weights(i, k));
      }
      const double lo = bounds[l].lower(i) - options.bound_slack;
      const double hi = bounds[l].upper(i) + options.bound_slack;
      const std::string name = prefix + "_l" + std::to_string(l) + "n" + std::to_string(i);
      if (hi <= 0.0) {
        next.emplace_back();
        continue;
      }
      const int a = m.add_variable(name + "_a", std::max(0.0, lo), hi);
      out.continuous.push_back(a);
      LinearExpr diff = LinearExpr::variable(a);
      diff.add(pre, -1.0);
      if (lo >= 0.0) {
        m.add_constraint(diff, RowSense::Equal, 0.0, name + "_active");
      } else {
        const int d = m.add_binary(name + "_on");
        out.binaries.push_back(d);
        m.add_constraint(diff, RowSense::GreaterEqual, 0.0, name + "_ge");
        LinearExpr upper = diff;
        upper.add(d, -lo);
        m.add_constraint(upper, RowSense::LessEqual, -lo, name + "_off");
        m.add_constraint({{a, 1.0}, {d, -hi}}, RowSense::LessEqual, 0.0, name + "_on");
      }
      next.push_back(LinearExpr::variable(a));
    }
    act = std::move(next);
  }

  const DenseLayer& last = layers.back();
  LinearExpr y({}, last.bias(0));
  for (std::size_t k = 0; k < act.size(); ++k) {
    if (last.weights(0, k) != 0.0) y.add(act[k], last.weights(0, k));
  }
  const LayerBounds& ob = bounds.back();
  const double pad = 1e-9 * (1.0 + std::max(std::abs(ob.lower(0)), std::abs(ob.upper(0))));
  out.output = m.add_variable(prefix + "_y", ot + st * (ob.lower(0) - options.bound_slack - pad),
                              ot + st * (ob.upper(0) + options.bound_slack + pad));
  LinearExpr row = LinearExpr::variable(out.output);
  row.add(y, -st);
  m.add_constraint(row, RowSense::Equal, ot, prefix + "_out");
  return out;
}

}  // namespace

std::vector<LayerBounds> propagate_bounds(const learn::Mlp& mlp, const Box& input_box) {
  if (mlp.layers.empty()) throw ConfigError("empty network");
  if (input_box.dim() != mlp.input_dim()) throw DimensionError("box dimension mismatch");
  if (!input_box.lower.allFinite() || !input_box.upper.allFinite()) {
    throw BoundError("interval propagation needs a finite box");
  }
  std::vector<LayerBounds> out;
  Vector lo = input_box.lower, hi = input_box.upper;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const Matrix& w = mlp.layers[l].weights;
    const Matrix wp = w.cwiseMax(0.0), wn = w.cwiseMin(0.0);
    LayerBounds b;
    b.lower = wp * lo + wn * hi + mlp.layers[l].bias;
    b.upper = wp * hi + wn * lo + mlp.layers[l].bias;
    lo = b.lower.cwiseMax(0.0);
    hi = b.upper.cwiseMax(0.0);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<LayerBounds> propagate_bounds(const learn::TrainedRegressor& model, const Box& box) {
  if (model.kind != learn::ModelKind::Mlp) throw ConfigError("bound propagation needs an MLP");
  if (box.dim() != model.input_dim()) throw DimensionError("box dimension mismatch");
  const Box scaled(model.input_scaler.transform(box.lower), model.input_scaler.transform(box.upper));
  return propagate_bounds(model.mlp, scaled);
}

EmbeddedOutput embed_regressor(const learn::TrainedRegressor& model, std::span<const int> x_vars,
                               milp::MilpModel& milp, const EmbedOptions& options) {
  if (static_cast<int>(x_vars.size()) != model.input_dim()) {
    throw DimensionError("model input dimension does not match x variables");
  }
  const std::string prefix = "m" + std::to_string(milp.num_vars());
  const int first_row = milp.num_rows();
  EmbeddedOutput out;
  switch (model.kind) {
    case learn::ModelKind::Linear:
      out = embed_linear(model, x_vars, milp, prefix);
      break;
    case learn::ModelKind::Tree:
    case learn::ModelKind::Forest:
    case learn::ModelKind::Boosted:
      out = embed_trees(model, x_vars, variable_box(milp, x_vars), milp, options, prefix);
      break;
    case learn::ModelKind::Mlp:
      out = embed_mlp(model, x_vars, variable_box(milp, x_vars), milp, options, prefix);
      break;
    default:
      throw ConfigError("unsupported model kind for embedding");
  }
  out.first_row = first_row;
  out.end_row = milp.num_rows();
  return out;
}

IsoforBlock embed_isofor_depth(const learn::IsolationForestModel& forest,
                               std::span<const int> x_vars, int depth, milp::MilpModel& milp,
                               const EmbedOptions& options) {
  if (static_cast<int>(x_vars.size()) != forest.dim) {
    throw DimensionError("forest dimension does not match x variables");
  }
  if (depth < 0 || depth > forest.max_depth) throw ArgumentError("depth threshold out of range");
  const Box box = variable_box(milp, x_vars);
  IsoforBlock block;
  block.first_row = milp.num_rows();
  if (depth == 0) {
    block.end_row = block.first_row;
    return block;
  }
  double extent = 1.0;
  for (int j = 0; j < box.dim(); ++j) {
    extent = std::max({extent, std::abs(box.lower(j)), std::abs(box.upper(j))});
  }
  const double margin = std::max(options.split_margin, options.isofor_margin * extent);
  for (std::size_t k = 0; k < forest.trees.size(); ++k) {
    const auto& nodes = forest.trees[k].nodes;
    if (forest.trees[k].max_leaf_depth() < depth) block.infeasible = true;
    block.leaf_vars.push_back(embed_tree(
        nodes, x_vars, box, milp, [&](int i) { return nodes[i].threshold; },
        [&](int i) { return nodes[i].depth >= depth; }, margin, margin,
        "iso" + std::to_string(milp.num_vars()) + "_t" + std::to_string(k)));
  }
  block.end_row = milp.num_rows();
  return block;
}

}  // namespace clearn::embed
