#include "clearn/milp/model.hpp"

#include <algorithm>
#include <cmath>

namespace clearn::milp {

int MilpModel::add_variable(std::string name, double lower, double upper, VarType type) {
  if (name.empty()) name = "v" + std::to_string(vars_.size());
  vars_.push_back({std::move(name), lower, upper, type});
  return num_vars() - 1;
}

int MilpModel::add_constraint(std::vector<Term> terms, RowSense sense, double rhs,
                              std::string name) {
  for (const Term& t : terms) check_var(t.var);
  rows_.push_back({std::move(terms), sense, rhs, std::move(name)});
  return num_rows() - 1;
}

int MilpModel::add_constraint(const LinearExpr& lhs, RowSense sense, double rhs,
                              std::string name) {
  return add_constraint(lhs.terms, sense, rhs - lhs.constant, std::move(name));
}

void MilpModel::set_objective(const LinearExpr& expr, ObjectiveSense sense) {
  for (const Term& t : expr.terms) check_var(t.var);
  objective_ = expr;
  sense_ = sense;
}

void MilpModel::set_bounds(int var, double lower, double upper) {
  check_var(var);
  vars_[var].lower = lower;
  vars_[var].upper = upper;
}

int MilpModel::add_ball_group(std::vector<int> vars, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
  for (int v : vars) {
    check_var(v);
    if (vars_[v].type != VarType::Continuous) {
      throw ArgumentError("ball variables must be continuous");
    }
  }
  balls_.push_back({std::move(vars), radius});
  return static_cast<int>(balls_.size()) - 1;
}

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.type == VarType::Binary;
  }));
}

void MilpModel::check_var(int var) const {
  if (var < 0 || var >= num_vars()) {
    throw ConfigError("reference to undeclared variable " + std::to_string(var));
  }
}

void MilpModel::validate() const {
  for (const Variable& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper)) {
      throw ConfigError("variable " + v.name + " has a NaN bound");
    }
    if (v.type == VarType::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw ConfigError("binary variable " + v.name + " has bounds outside [0,1]");
    }
  }
  for (const Constraint& row : rows_) {
    for (const Term& t : row.terms) check_var(t.var);
    if (!std::isfinite(row.rhs)) throw ConfigError("constraint " + row.name + " has a non-finite rhs");
  }
  for (const Term& t : objective_.terms) check_var(t.var);
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::LimitReached: return "LimitReached";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(feasibility_tol > 0) || !(integrality_tol > 0) || !(relative_gap > 0) ||
      !(absolute_gap > 0) || !(optimality_tol > 0) || !(ball_tol > 0)) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (node_limit < 1 || ball_iteration_cap < 1 || refactor_interval < 1) {
    throw ConfigError("solver limits must be positive");
  }
}

ResidualReport check_point(const MilpModel& model, const Eigen::Ref<const Vector>& point) {
  if (point.size() != model.num_vars()) {
    throw DimensionError("point does not cover every variable");
  }
  ResidualReport rep;
  rep.row_residuals.reserve(model.num_rows());
  for (const Constraint& row : model.constraints()) {
    double lhs = 0.0;
    for (const Term& t : row.terms) lhs += t.coef * point(t.var);
    double r = 0.0;
    switch (row.sense) {
      case RowSense::LessEqual: r = lhs - row.rhs; break;
      case RowSense::GreaterEqual: r = row.rhs - lhs; break;
      case RowSense::Equal: r = std::abs(lhs - row.rhs); break;
    }
    rep.row_residuals.push_back(r);
    rep.max_row_violation = std::max(rep.max_row_violation, r);
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variable(j);
    const double x = point(j);
    rep.max_bound_violation = std::max({rep.max_bound_violation, v.lower - x, x - v.upper});
    if (v.type == VarType::Binary) {
      rep.max_integrality_violation =
          std::max(rep.max_integrality_violation, std::abs(x - std::round(x)));
    }
  }
  rep.max_violation = std::max(rep.max_row_violation, rep.max_bound_violation);
  return rep;
}

}  // namespace clearn::milp
