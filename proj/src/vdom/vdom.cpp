#include "clearn/vdom.hpp"

#include "clearn/embed.hpp"
#include "clearn/milp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace clearn::vdom {

namespace {

using milp::LinearExpr;
using milp::MilpModel;
using milp::RowSense;
using milp::Term;

// One hull coordinate: the model-side expression, its data values over the
// selected rows, and the unit used for the enlargement ball.
struct Coordinate {
  LinearExpr expr;
  Vector data;
  double ball_unit = 1.0;
  double residual_unit = 1.0;
};

double range_or_one(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) return 1.0;
  const double r = v.maxCoeff() - v.minCoeff();
  return r > 0.0 ? r : 1.0;
}

Vector gather(const Eigen::Ref<const Vector>& column, const std::vector<int>& rows) {
  Vector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = column(rows[i]);
  return out;
}

// X from the context, else the current x bounds, else the whole space.
Box x_box_or_bounds(const DomainContext& context, const MilpModel* model,
                    std::span<const int> x_vars, int n1) {
  if (context.x_box.dim() == n1) return context.x_box;
  Box box = Box::uniform(n1, -milp::kInf, milp::kInf);
  if (model == nullptr) return box;
  for (int j = 0; j < n1; ++j) {
    box.lower(j) = model->variable(x_vars[j]).lower;
    box.upper(j) = model->variable(x_vars[j]).upper;
  }
  return box;
}

void require_finite(const Box& box) {
  if (!box.lower.allFinite() || !box.upper.allFinite()) {
    throw BoundError("enlarged domains need a finite box X");
  }
}

double ball_radius(const ValidityDomainSpec& spec, int n1) {
  return spec.enlarged() ? spec.epsilon * std::sqrt(static_cast<double>(n1)) : 0.0;
}

// Normalized enlargement slacks v, one per hull coordinate, with the norm
// restriction ||v|| <= radius already attached.
struct BallSlacks {
  std::vector<int> vars;       // L2 / Linf: one per coordinate
  std::vector<int> pos, neg;   // L1 split
};

BallSlacks add_ball(MilpModel& m, Norm norm, double radius, int count, const std::string& prefix) {
  BallSlacks slacks;
  for (int k = 0; k < count; ++k) {
    const std::string name = prefix + "_v" + std::to_string(k);
    if (norm == Norm::L1) {
      slacks.pos.push_back(m.add_variable(name + "p", 0.0, radius));
      slacks.neg.push_back(m.add_variable(name + "n", 0.0, radius));
    } else {
      slacks.vars.push_back(m.add_variable(name, -radius, radius));
    }
  }
  if (norm == Norm::L1) {
    std::vector<Term> sum;
    for (int k = 0; k < count; ++k) {
      sum.push_back({slacks.pos[k], 1.0});
      sum.push_back({slacks.neg[k], 1.0});
    }
    m.add_constraint(sum, RowSense::LessEqual, radius, prefix + "_l1");
  } else if (norm == Norm::L2 && count > 0 && radius > 0.0) {
    m.add_ball_group(slacks.vars, radius);
  }
  return slacks;
}

void add_slack_terms(std::vector<Term>& terms, const BallSlacks& slacks, int k, double coef) {
  if (!slacks.pos.empty()) {
    terms.push_back({slacks.pos[k], coef});
    terms.push_back({slacks.neg[k], -coef});
  } else if (!slacks.vars.empty()) {
    terms.push_back({slacks.vars[k], coef});
  }
}

std::vector<Coordinate> hull_coordinates(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                                         const std::vector<int>& rows, const Box& x_box) {
  std::vector<Coordinate> coords;
  for (int j = 0; j < ext.n1(); ++j) {
    Coordinate c;
    c.data = gather(ext.base.inputs.col(j), rows);
    c.ball_unit = x_box.upper(j) - x_box.lower(j);
    if (!(c.ball_unit > 0.0) || !std::isfinite(c.ball_unit)) c.ball_unit = 1.0;
    coords.push_back(std::move(c));
  }
  if (!spec.extended()) return coords;
  for (int k : spec.output_subset) {
    Coordinate c;
    c.data = gather(ext.outputs.col(k), rows);
    c.ball_unit = range_or_one(c.data);
    c.residual_unit = std::max(1.0, c.data.maxCoeff() - c.data.minCoeff());
    coords.push_back(std::move(c));
  }
  if (spec.append_objective) {
    Coordinate c;
    c.data = gather(ext.objective, rows);
    c.ball_unit = range_or_one(c.data);
    c.residual_unit = std::max(1.0, c.data.maxCoeff() - c.data.minCoeff());
    coords.push_back(std::move(c));
  }
  return coords;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int ExtendedDataset::feasible_count() const {
  return static_cast<int>(std::count(feasible.begin(), feasible.end(), true));
}

ExtendedDataset build_extended_dataset(const bench::Dataset& dataset, Matrix outputs,
                                       Vector objective, const FeasibilityRule& rule) {
  const int n = dataset.size();
  if (outputs.size() == 0) outputs.resize(n, 0);
  if (outputs.rows() != n) throw DimensionError("output tuples do not match the dataset size");
  if (objective.size() != n) throw DimensionError("objective values do not match the dataset size");
  ExtendedDataset ext;
  ext.base = dataset;
  ext.outputs = std::move(outputs);
  ext.objective = std::move(objective);
  ext.feasible.assign(n, true);
  if (rule) {
    for (int i = 0; i < n; ++i) {
      ext.feasible[i] = rule(ext.base.inputs.row(i).transpose(), ext.outputs.row(i).transpose());
    }
  }
  return ext;
}

DomainKind parse_domain_kind(std::string_view name) {
  if (name == "Box") return DomainKind::Box;
  if (name == "CH") return DomainKind::CH;
  if (name == "CHeps") return DomainKind::CHeps;
  if (name == "IsoFor") return DomainKind::IsoFor;
  if (name == "CHplus") return DomainKind::CHplus;
  if (name == "CHplusEps") return DomainKind::CHplusEps;
  throw ConfigError("unknown domain kind '" + std::string(name) + "'");
}

std::string_view domain_kind_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::Box: return "Box";
    case DomainKind::CH: return "CH";
    case DomainKind::CHeps: return "CHeps";
    case DomainKind::IsoFor: return "IsoFor";
    case DomainKind::CHplus: return "CHplus";
    case DomainKind::CHplusEps: return "CHplusEps";
  }
  return "?";
}

Norm parse_norm(std::string_view name) {
  if (name == "1" || name == "L1") return Norm::L1;
  if (name == "2" || name == "L2") return Norm::L2;
  if (name == "inf" || name == "Linf") return Norm::Linf;
  throw ConfigError("unknown norm '" + std::string(name) + "'");
}

std::string_view norm_name(Norm norm) {
  switch (norm) {
    case Norm::L1: return "L1";
    case Norm::L2: return "L2";
    case Norm::Linf: return "Linf";
  }
  return "?";
}

DataSubset ValidityDomainSpec::subset() const {
  if (data_subset) return *data_subset;
  return extended() ? DataSubset::FeasibleOnly : DataSubset::All;
}

std::string ValidityDomainSpec::label() const {
  std::string out(domain_kind_name(kind));
  if (enlarged()) out += "(" + format_number(epsilon) + " " + std::string(norm_name(norm)) + ")";
  if (kind == DomainKind::IsoFor) out += "(" + std::to_string(isofor_depth) + ")";
  if (extended()) {
    if (!output_subset.empty()) {
      out += "[J=";
      for (std::size_t i = 0; i < output_subset.size(); ++i) {
        if (i > 0) out += " ";
        out += std::to_string(output_subset[i]);
      }
      out += "]";
    }
    if (!append_objective) out += "[nophi]";
  }
  if (data_subset && *data_subset != (extended() ? DataSubset::FeasibleOnly : DataSubset::All)) {
    out += *data_subset == DataSubset::All ? "[all]" : "[feasible]";
  }
  return out;
}

void ValidityDomainSpec::validate(int n2) const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be >= 0");
  if (isofor_depth < 0) throw ArgumentError("isolation depth must be >= 0");
  if (!extended()) return;
  std::vector<int> seen(n2, 0);
  for (int k : output_subset) {
    if (k < 0 || k >= n2) throw ArgumentError("output index " + std::to_string(k) + " out of range");
    if (seen[k]++) throw ArgumentError("output index " + std::to_string(k) + " repeated");
  }
}

std::vector<int> selected_rows(const ValidityDomainSpec& spec, const ExtendedDataset& ext) {
  std::vector<int> rows;
  const bool all = spec.subset() == DataSubset::All;
  for (int i = 0; i < ext.size(); ++i) {
    if (all || ext.feasible[i]) rows.push_back(i);
  }
  return rows;
}

Box implied_box(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                const DomainContext& context) {
  const int n1 = ext.n1();
  Box box = x_box_or_bounds(context, nullptr, {}, n1);
  if (spec.kind == DomainKind::IsoFor) return box;
  const std::vector<int> rows = selected_rows(spec, ext);
  if (rows.empty()) throw DomainError("validity domain has no data rows");
  const double r = ball_radius(spec, n1);
  if (spec.enlarged()) require_finite(box);
  for (int j = 0; j < n1; ++j) {
    const Vector col = gather(ext.base.inputs.col(j), rows);
    const double pad = r > 0.0 ? r * box.width()(j) : 0.0;
    box.lower(j) = std::max(box.lower(j), col.minCoeff() - pad);
    box.upper(j) = std::min(box.upper(j), col.maxCoeff() + pad);
  }
  return box;
}

DomainBlock attach_domain(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                          MilpModel& model, std::span<const int> x_vars,
                          std::span<const int> y_vars, const LinearExpr* objective,
                          const DomainContext& context) {
  spec.validate(ext.n2());
  const int n1 = ext.n1();
  if (static_cast<int>(x_vars.size()) != n1) {
    throw DimensionError("x variables do not match the dataset dimension");
  }
  DomainBlock block;
  block.first_row = model.num_rows();
  const std::string prefix = "dom" + std::to_string(model.num_vars());

  if (spec.kind == DomainKind::IsoFor) {
    if (context.forest == nullptr) throw ConfigError("IsoFor domain needs a trained forest");
    const embed::IsoforBlock iso =
        embed::embed_isofor_depth(*context.forest, x_vars, spec.isofor_depth, model);
    block.infeasible = iso.infeasible;
    block.end_row = model.num_rows();
    return block;
  }

  const std::vector<int> rows = selected_rows(spec, ext);
  if (rows.empty()) throw DomainError("validity domain has no data rows");
  if (spec.extended()) {
    for (int k : spec.output_subset) {
      if (k >= static_cast<int>(y_vars.size()) || y_vars[k] < 0) {
        throw ConfigError("CHplus needs a model output variable for y" + std::to_string(k));
      }
    }
    if (spec.append_objective && objective == nullptr) {
      throw ConfigError("CHplus with an appended objective needs the objective expression");
    }
  }

  // Tighten x to the bounding box of the domain; this is implied by every
  // kind handled below.
  const Box x_box = x_box_or_bounds(context, &model, x_vars, n1);
  DomainContext local = context;
  local.x_box = x_box;
  const Box tight = implied_box(spec, ext, local);
  for (int j = 0; j < n1; ++j) {
    const milp::Variable& v = model.variable(x_vars[j]);
    const double lo = std::max(v.lower, tight.lower(j));
    const double hi = std::min(v.upper, tight.upper(j));
    if (lo > hi) {
      block.infeasible = true;
      const int dead = model.add_variable(prefix + "_empty", 0.0, 0.0);
      model.add_constraint({{dead, 1.0}}, RowSense::Equal, 1.0, prefix + "_outside_x");
      block.end_row = model.num_rows();
      return block;
    }
    model.set_bounds(x_vars[j], lo, hi);
  }
  if (spec.kind == DomainKind::Box) {
    block.end_row = model.num_rows();
    return block;
  }

  std::vector<Coordinate> coords = hull_coordinates(spec, ext, rows, x_box);
  for (int j = 0; j < n1; ++j) coords[j].expr = LinearExpr::variable(x_vars[j]);
  if (spec.extended()) {
    std::size_t c = n1;
    for (int k : spec.output_subset) coords[c++].expr = LinearExpr::variable(y_vars[k]);
    if (spec.append_objective) coords[c].expr = *objective;
  }

  const int m = static_cast<int>(rows.size());
  std::vector<Term> convexity;
  for (int i = 0; i < m; ++i) {
    block.lambda.push_back(model.add_variable(prefix + "_l" + std::to_string(rows[i]), 0.0, 1.0));
    convexity.push_back({block.lambda.back(), 1.0});
  }
  model.add_constraint(convexity, RowSense::Equal, 1.0, prefix + "_convex");

  BallSlacks slacks;
  if (spec.enlarged()) {
    slacks = add_ball(model, spec.norm, ball_radius(spec, n1), static_cast<int>(coords.size()),
                      prefix);
    block.ball = slacks.vars.empty() ? slacks.pos : slacks.vars;
  }
  // expr - sum l_i d_i - unit * v = 0
  for (std::size_t k = 0; k < coords.size(); ++k) {
    LinearExpr row = coords[k].expr;
    for (int i = 0; i < m; ++i) {
      if (coords[k].data(i) != 0.0) row.add(block.lambda[i], -coords[k].data(i));
    }
    add_slack_terms(row.terms, slacks, static_cast<int>(k), -coords[k].ball_unit);
    model.add_constraint(row, RowSense::Equal, 0.0, prefix + "_c" + std::to_string(k));
  }
  block.end_row = model.num_rows();
  return block;
}

Membership membership_test(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                           const Eigen::Ref<const Vector>& point,
                           const Eigen::Ref<const Vector>& tuple, const DomainContext& context,
                           double tol) {
  spec.validate(ext.n2());
  const int n1 = ext.n1();
  if (point.size() != n1) throw DimensionError("point dimension does not match the dataset");
  Membership result;

  if (spec.kind == DomainKind::IsoFor) {
    if (context.forest == nullptr) throw ConfigError("IsoFor domain needs a trained forest");
    for (const auto& tree : context.forest->trees) {
      const int depth = tree.nodes[tree.leaf_index(point)].depth;
      result.residual += std::max(0, spec.isofor_depth - depth);
    }
    result.inside = result.residual == 0.0;
    return result;
  }

  const std::vector<int> rows = selected_rows(spec, ext);
  if (rows.empty()) throw DomainError("validity domain has no data rows");

  if (spec.kind == DomainKind::Box) {
    for (int j = 0; j < n1; ++j) {
      const Vector col = gather(ext.base.inputs.col(j), rows);
      result.residual += std::max(0.0, col.minCoeff() - point(j));
      result.residual += std::max(0.0, point(j) - col.maxCoeff());
    }
    result.inside = result.residual <= tol;
    return result;
  }

  const Box x_box = x_box_or_bounds(context, nullptr, {}, n1);
  if (spec.enlarged()) require_finite(x_box);
  const std::vector<Coordinate> coords = hull_coordinates(spec, ext, rows, x_box);
  const int extra = static_cast<int>(coords.size()) - n1;
  if (tuple.size() != extra) throw DimensionError("tuple length does not match the domain");

  // min sum(p + q)  s.t.  (sum l_i d_i + unit * v + p - q) / scale = target / scale
  MilpModel lp;
  const int m = static_cast<int>(rows.size());
  std::vector<int> lambda;
  std::vector<Term> convexity;
  for (int i = 0; i < m; ++i) {
    lambda.push_back(lp.add_variable("l" + std::to_string(i), 0.0, 1.0));
    convexity.push_back({lambda.back(), 1.0});
  }
  lp.add_constraint(convexity, RowSense::Equal, 1.0, "convex");
  BallSlacks slacks;
  if (spec.enlarged()) {
    slacks = add_ball(lp, spec.norm, ball_radius(spec, n1), static_cast<int>(coords.size()), "b");
  }
  LinearExpr violation;
  std::vector<int> coord_rows;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double scale = coords[k].residual_unit;
    const double target = k < static_cast<std::size_t>(n1) ? point(k) : tuple(k - n1);
    std::vector<Term> terms;
    for (int i = 0; i < m; ++i) {
      if (coords[k].data(i) != 0.0) terms.push_back({lambda[i], coords[k].data(i) / scale});
    }
    add_slack_terms(terms, slacks, static_cast<int>(k), coords[k].ball_unit / scale);
    const int p = lp.add_variable("p" + std::to_string(k), 0.0, milp::kInf);
    const int q = lp.add_variable("q" + std::to_string(k), 0.0, milp::kInf);
    terms.push_back({p, 1.0});
    terms.push_back({q, -1.0});
    violation.add(p, 1.0).add(q, 1.0);
    coord_rows.push_back(lp.add_constraint(terms, RowSense::Equal, target / scale, "c" + std::to_string(k)));
  }
  lp.set_objective(violation, milp::ObjectiveSense::Minimize);
  const milp::Solution sol = lp.ball_groups().empty() ? milp::solve_lp(lp) : milp::solve(lp);
  if (sol.status != milp::SolveStatus::Optimal) {
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }
  result.residual = std::max(0.0, sol.objective);
  result.inside = result.residual <= tol;
  if (!result.inside && sol.duals.size() == lp.num_rows()) {
    result.separator.resize(static_cast<Eigen::Index>(coord_rows.size()));
    for (std::size_t k = 0; k < coord_rows.size(); ++k) {
      result.separator(k) = std::clamp(sol.duals(coord_rows[k]), -1.0, 1.0);
    }
  }
  return result;
}

HullScreen::HullScreen(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                       const DomainContext& context, int directions, std::uint64_t seed)
    : n1_(ext.n1()) {
  if (spec.kind == DomainKind::Box || spec.kind == DomainKind::IsoFor || spec.enlarged()) return;
  spec.validate(ext.n2());
  const std::vector<int> rows = selected_rows(spec, ext);
  if (rows.empty()) throw DomainError("validity domain has no data rows");
  const std::vector<Coordinate> coords =
      hull_coordinates(spec, ext, rows, x_box_or_bounds(context, nullptr, {}, n1_));
  const int dim = static_cast<int>(coords.size());
  Matrix data(rows.size(), dim);
  unit_.resize(dim);
  for (int k = 0; k < dim; ++k) {
    unit_(k) = coords[k].residual_unit;
    data.col(k) = coords[k].data / unit_(k);
  }
  data_ = data;
  dirs_.setZero(2 * dim + std::max(0, directions), dim);
  for (int k = 0; k < dim; ++k) {
    dirs_(2 * k, k) = 1.0;
    dirs_(2 * k + 1, k) = -1.0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (Eigen::Index r = 2 * dim; r < dirs_.rows(); ++r) {
    for (int k = 0; k < dim; ++k) dirs_(r, k) = z(rng);
    const double m = dirs_.row(r).cwiseAbs().maxCoeff();
    if (m > 0.0) dirs_.row(r) /= m;
  }
  support_ = (data * dirs_.transpose()).colwise().maxCoeff().transpose();
}

void HullScreen::add_direction(const Eigen::Ref<const Vector>& direction) {
  if (data_.size() == 0) return;
  if (direction.size() != data_.cols()) throw DimensionError("direction does not match the screened domain");
  const double m = direction.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) return;
  const Vector a = direction / m;
  dirs_.conservativeResize(dirs_.rows() + 1, Eigen::NoChange);
  dirs_.row(dirs_.rows() - 1) = a.transpose();
  support_.conservativeResize(support_.size() + 1);
  support_(support_.size() - 1) = (data_ * a).maxCoeff();
}

bool HullScreen::excludes(const Eigen::Ref<const Vector>& point, const Eigen::Ref<const Vector>& tuple,
                          double tol) const {
  if (dirs_.rows() == 0) return false;
  if (point.size() != n1_ || point.size() + tuple.size() != unit_.size()) {
    throw DimensionError("point does not match the screened domain");
  }
  Vector v(unit_.size());
  v << point, tuple;
  v.array() /= unit_.array();
  // max-norm 1 directions bound the L1 residual from below
  return ((dirs_ * v) - support_).maxCoeff() > tol;
}

}  // namespace clearn::vdom
