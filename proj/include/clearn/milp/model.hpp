#pragma once

#include "clearn/common.hpp"

#include <limits>
#include <string>
#include <vector>

namespace clearn::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

struct Term {
  int var;
  double coef;
};

/// Sum of coefficient * variable plus a constant.
struct LinearExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinearExpr() = default;
  LinearExpr(std::vector<Term> t, double c = 0.0) : terms(std::move(t)), constant(c) {}

  static LinearExpr variable(int var, double coef = 1.0) { return LinearExpr({{var, coef}}); }

  LinearExpr& add(int var, double coef) {
    terms.push_back({var, coef});
    return *this;
  }
  LinearExpr& add(const LinearExpr& other, double scale = 1.0) {
    for (const Term& t : other.terms) terms.push_back({t.var, scale * t.coef});
    constant += scale * other.constant;
    return *this;
  }

  double evaluate(const Eigen::Ref<const Vector>& x) const {
    double v = constant;
    for (const Term& t : terms) v += t.coef * x(t.var);
    return v;
  }
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::Continuous;
};

struct Constraint {
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// Euclidean-ball requirement ||v||_2 <= radius over a group of continuous
/// variables, enforced by solve() through cutting planes.
struct BallGroup {
  std::vector<int> vars;
  double radius = 0.0;
};

class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper,
                   VarType type = VarType::Continuous);
  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarType::Binary); }

  int add_constraint(std::vector<Term> terms, RowSense sense, double rhs, std::string name = {});
  /// Adds lhs (sense) rhs, moving the expression constant to the right-hand side.
  int add_constraint(const LinearExpr& lhs, RowSense sense, double rhs, std::string name = {});

  void set_objective(const LinearExpr& expr, ObjectiveSense sense);
  void set_bounds(int var, double lower, double upper);
  void fix(int var, double value) { set_bounds(var, value, value); }
  int add_ball_group(std::vector<int> vars, double radius);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;

  const Variable& variable(int i) const { return vars_.at(i); }
  const Constraint& constraint(int i) const { return rows_.at(i); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const LinearExpr& objective() const { return objective_; }
  ObjectiveSense objective_sense() const { return sense_; }
  const std::vector<BallGroup>& ball_groups() const { return balls_; }

  double objective_value(const Eigen::Ref<const Vector>& x) const { return objective_.evaluate(x); }

  /// Throws ConfigError when a row references an undeclared variable, a
  /// binary has bounds outside [0,1], or some lower bound exceeds its upper.
  void validate() const;

 private:
  void check_var(int var) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  LinearExpr objective_;
  ObjectiveSense sense_ = ObjectiveSense::Minimize;
  std::vector<BallGroup> balls_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, LimitReached };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  Vector values;  // empty when no feasible point is known
  /// Row prices y of the minimization form (objective negated when
  /// maximizing): cost - A^T y are the reduced costs. Set by solve_lp only.
  Vector duals;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  int cut_rounds = 0;            // tangent cuts added
  double ball_violation = 0.0;   // largest ball violation seen before a cut

  bool has_point() const { return values.size() > 0; }
};

struct SolverConfig {
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  long node_limit = 200000;
  double time_limit = kInf;  // seconds
  double optimality_tol = 1e-9;
  int bland_after = 50;  // consecutive degenerate pivots before Bland's rule
  int refactor_interval = 100;
  double ball_tol = 1e-6;  // relative to the radius
  int ball_iteration_cap = 500;  // maximum number of tangent cuts

  void validate() const;
};

struct ResidualReport {
  std::vector<double> row_residuals;  // > 0 means the row is violated by that amount
  double max_row_violation = 0.0;
  double max_bound_violation = 0.0;
  double max_integrality_violation = 0.0;
  double max_violation = 0.0;  // rows and bounds
};

ResidualReport check_point(const MilpModel& model, const Eigen::Ref<const Vector>& point);

}  // namespace clearn::milp
