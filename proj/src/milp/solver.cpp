#include "clearn/milp/solver.hpp"

#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <optional>
#include <queue>

namespace clearn::milp {

namespace {

using detail::Clock;

Clock::time_point deadline_for(const SolverConfig& config, Clock::time_point start) {
  if (!std::isfinite(config.time_limit)) return Clock::time_point::max();
  return start + std::chrono::duration_cast<Clock::duration>(
                     std::chrono::duration<double>(config.time_limit));
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void model_bounds(const MilpModel& model, Vector& lower, Vector& upper) {
  const int n = model.num_vars();
  lower.resize(n);
  upper.resize(n);
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    lower(j) = v.lower;
    upper(j) = v.upper;
    if (v.type == VarType::Binary) {
      lower(j) = std::max(lower(j), 0.0);
      upper(j) = std::min(upper(j), 1.0);
    }
  }
}

// Sparse copy of the rows for activity-based bound propagation.
class Propagator {
 public:
  Propagator(const MilpModel& model, const SolverConfig& config) : cfg_(config) {
    binary_.resize(model.num_vars());
    for (int j = 0; j < model.num_vars(); ++j) {
      binary_[j] = model.variable(j).type == VarType::Binary;
    }
    for (const Constraint& c : model.constraints()) {
      std::vector<Term> sorted = c.terms;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const Term& a, const Term& b) { return a.var < b.var; });
      std::vector<Term> terms;
      for (const Term& t : sorted) {
        if (!terms.empty() && terms.back().var == t.var) terms.back().coef += t.coef; else terms.push_back(t);
      }
      std::erase_if(terms, [](const Term& t) { return t.coef == 0.0; });
      if (c.sense != RowSense::GreaterEqual) rows_.push_back({terms, c.rhs});
      if (c.sense != RowSense::LessEqual) {
        for (Term& t : terms) t.coef = -t.coef;
        rows_.push_back({std::move(terms), -c.rhs});
      }
    }
  }

  // Tightens bounds from every row sum a x <= b until nothing changes.
  // Returns false when some row cannot be satisfied.
  bool run(Vector& lower, Vector& upper) const {
    for (int pass = 0; pass < 20; ++pass) {
      bool changed = false;
      for (const Row& r : rows_) {
        double min_act = 0.0;
        int inf_count = 0;
        int inf_var = -1;
        for (const Term& t : r.terms) {
          const double b = t.coef > 0 ? lower(t.var) : upper(t.var);
          if (std::isfinite(b)) {
            min_act += t.coef * b;
          } else {
            ++inf_count;
            inf_var = t.var;
          }
        }
        const double slack_tol = 1e-6 * (1.0 + std::abs(r.rhs));
        if (inf_count == 0 && min_act > r.rhs + slack_tol) return false;
        if (inf_count > 1) continue;
        for (const Term& t : r.terms) {
          const bool own_inf = !std::isfinite(t.coef > 0 ? lower(t.var) : upper(t.var));
          if (inf_count == 1 && (!own_inf || t.var != inf_var)) continue;
          const double rest = own_inf ? min_act : min_act - t.coef * (t.coef > 0 ? lower(t.var) : upper(t.var));
          const double bound = (r.rhs - rest) / t.coef;
          const int j = t.var;
          if (t.coef > 0) {
            changed |= tighten_upper(j, bound, lower, upper);
          } else {
            changed |= tighten_lower(j, bound, lower, upper);
          }
          if (lower(j) > upper(j) + cfg_.feasibility_tol) return false;
        }
      }
      if (!changed) break;
    }
    return true;
  }

 private:
  struct Row {
    std::vector<Term> terms;
    double rhs;
  };

  bool tighten_upper(int j, double bound, const Vector& lower, Vector& upper) const {
    if (binary_[j]) {
      if (upper(j) > 0.5 && bound < 1.0 - cfg_.integrality_tol) {
        upper(j) = 0.0;
        return true;
      }
      return false;
    }
    const double relaxed = bound + cfg_.feasibility_tol * (1.0 + std::abs(bound));
    const double range = std::isfinite(lower(j)) && std::isfinite(upper(j)) ? upper(j) - lower(j) : kInf;
    if (relaxed < upper(j) - std::max(1e-6, 1e-3 * std::min(range, 1e6))) {
      upper(j) = std::max(relaxed, lower(j));
      return true;
    }
    return false;
  }

  bool tighten_lower(int j, double bound, Vector& lower, const Vector& upper) const {
    if (binary_[j]) {
      if (lower(j) < 0.5 && bound > cfg_.integrality_tol) {
        lower(j) = 1.0;
        return true;
      }
      return false;
    }
    const double relaxed = bound - cfg_.feasibility_tol * (1.0 + std::abs(bound));
    const double range = std::isfinite(lower(j)) && std::isfinite(upper(j)) ? upper(j) - lower(j) : kInf;
    if (relaxed > lower(j) + std::max(1e-6, 1e-3 * std::min(range, 1e6))) {
      lower(j) = std::min(relaxed, upper(j));
      return true;
    }
    return false;
  }

  const SolverConfig& cfg_;
  std::vector<bool> binary_;
  std::vector<Row> rows_;
};

struct Node {
  double bound;
  long id;
  std::vector<signed char> fixing;  // per binary: -1 free, 0 or 1
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

Solution solve_lp(const MilpModel& model, const SolverConfig& config) {
  model.validate();
  config.validate();
  const auto start = Clock::now();
  const detail::LpData data(model);
  Vector lower, upper;
  model_bounds(model, lower, upper);
  const detail::LpOutcome lp =
      detail::solve_bounded_lp(data, lower, upper, config, deadline_for(config, start));
  Solution sol;
  sol.status = lp.status;
  sol.lp_iterations = lp.iterations;
  if (lp.status == SolveStatus::Optimal) {
    sol.values = lp.x;
    sol.duals = lp.duals;
    sol.objective = model.objective_value(lp.x);
    sol.bound = sol.objective;
  }
  sol.seconds = seconds_since(start);
  return sol;
}

namespace {

struct Group {
  std::vector<int> vars;
  double radius;
};

// Best-bound branch-and-bound. Ball groups are handled by outer
// approximation: when an integral node LP violates a ball, the tangent cut at
// the LP point joins the global row set and the node LP is solved again, so
// incumbents always satisfy every ball.
Solution branch_and_bound(MilpModel model, const std::vector<Group>& groups,
                          const SolverConfig& config) {
  model.validate();
  config.validate();
  const auto start = Clock::now();
  const auto deadline = deadline_for(config, start);
  const bool maximize = model.objective_sense() == ObjectiveSense::Maximize;
  // Internal objective is always minimized.
  auto internal = [&](double obj) { return maximize ? -obj : obj; };

  for (const Group& g : groups) {
    if (!(g.radius >= 0.0)) throw ArgumentError("ball radius must be nonnegative");
    for (int v : g.vars) {
      if (v < 0 || v >= model.num_vars()) throw ConfigError("ball variable out of range");
      if (model.variable(v).type != VarType::Continuous) {
        throw ArgumentError("ball variables must be continuous");
      }
      // The l_inf box is implied by the ball and keeps every relaxation bounded.
      const Variable& var = model.variable(v);
      model.set_bounds(v, std::max(var.lower, -g.radius), std::min(var.upper, g.radius));
    }
  }
  std::optional<detail::LpData> data;
  data.emplace(model);

  Vector root_lower, root_upper;
  model_bounds(model, root_lower, root_upper);
  const Propagator propagator(model, config);
  std::vector<int> binaries;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.variable(j).type == VarType::Binary) binaries.push_back(j);
  }

  Solution sol;
  double incumbent = kInf;
  bool limit_hit = false;
  bool unbounded = false;

  // Adds tangent cuts for violated balls at x. Returns false when the cut
  // budget is exhausted while some ball is still violated.
  auto separate = [&](const Vector& x, bool& added) {
    added = false;
    for (const Group& g : groups) {
      double norm2 = 0.0;
      for (int v : g.vars) norm2 += x(v) * x(v);
      const double norm = std::sqrt(norm2);
      const double violation = norm - g.radius;
      if (violation <= config.ball_tol * std::max(g.radius, 1e-12)) continue;
      sol.ball_violation = std::max(sol.ball_violation, violation);
      if (sol.cut_rounds >= config.ball_iteration_cap) return false;
      std::vector<Term> cut;
      for (int v : g.vars) cut.push_back({v, x(v) / norm});
      model.add_constraint(std::move(cut), RowSense::LessEqual, g.radius, "ball_cut");
      ++sol.cut_rounds;
      added = true;
    }
    if (added) data.emplace(model);
    return true;
  };

  // Re-solves an integral point with its binaries fixed at the rounded values,
  // so the continuous part meets every row without the integrality slack. The
  // input is kept when the polished LP fails or breaks a ball.
  auto polish = [&](const Vector& x, Vector lo, Vector hi) {
    if (binaries.empty()) return x;
    for (int j : binaries) lo(j) = hi(j) = std::round(x(j));
    const detail::LpOutcome fixed = detail::solve_bounded_lp(*data, lo, hi, config, deadline);
    sol.lp_iterations += fixed.iterations;
    if (fixed.status != SolveStatus::Optimal) return x;
    for (const Group& g : groups) {
      double norm2 = 0.0;
      for (int v : g.vars) norm2 += fixed.x(v) * fixed.x(v);
      if (std::sqrt(norm2) - g.radius > config.ball_tol * std::max(g.radius, 1e-12)) return x;
    }
    Vector out = fixed.x;
    for (int j : binaries) out(j) = lo(j);
    return out;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push({-kInf, next_id++, std::vector<signed char>(binaries.size(), -1)});

  auto gap_closed = [&](double bound) {
    if (!std::isfinite(incumbent)) return false;
    const double tol =
        std::max(config.absolute_gap, config.relative_gap * std::max(1.0, std::abs(incumbent)));
    return incumbent - bound <= tol;
  };

  Vector lower, upper;
  double best_open = -kInf;
  while (!open.empty()) {
    Node node = open.top();
    best_open = node.bound;
    if (gap_closed(node.bound)) break;
    if (sol.nodes >= config.node_limit || Clock::now() > deadline) {
      limit_hit = true;
      break;
    }
    open.pop();
    ++sol.nodes;

    lower = root_lower;
    upper = root_upper;
    for (std::size_t k = 0; k < binaries.size(); ++k) {
      if (node.fixing[k] >= 0) lower(binaries[k]) = upper(binaries[k]) = node.fixing[k];
    }
    if (!propagator.run(lower, upper)) continue;
    detail::LpOutcome lp;
    bool out_of_cuts = false;
    int branch = -1;
    for (;;) {
      lp = detail::solve_bounded_lp(*data, lower, upper, config, deadline);
      sol.lp_iterations += lp.iterations;
      if (lp.status != SolveStatus::Optimal) break;
      branch = -1;
      double best_frac = config.integrality_tol;
      for (std::size_t k = 0; k < binaries.size(); ++k) {
        const double v = lp.x(binaries[k]);
        const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
        if (frac > best_frac + 1e-12) {
          best_frac = frac;
          branch = static_cast<int>(k);
        }
      }
      // Balls are only separated at integral points; fractional nodes branch
      // on the (still valid) weaker bound.
      if (branch >= 0 || groups.empty()) break;
      if (gap_closed(internal(model.objective_value(lp.x)))) break;
      bool added = false;
      if (!separate(lp.x, added)) {
        out_of_cuts = true;
        break;
      }
      if (!added) break;
    }
    if (lp.status == SolveStatus::LimitReached || out_of_cuts) {
      limit_hit = true;
      open.push(std::move(node));
      break;
    }
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      unbounded = true;
      break;
    }
    const double obj = internal(model.objective_value(lp.x));
    if (gap_closed(obj)) continue;

    if (branch < 0) {
      if (obj < incumbent) {
        incumbent = obj;
        sol.values = polish(lp.x, lower, upper);
      }
      continue;
    }
    for (signed char side : {0, 1}) {
      Node child{obj, next_id++, node.fixing};
      child.fixing[branch] = side;
      open.push(std::move(child));
    }
  }

  sol.seconds = seconds_since(start);
  if (unbounded) {
    sol.status = SolveStatus::Unbounded;
    sol.values.resize(0);
    return sol;
  }
  if (open.empty()) best_open = incumbent;
  if (sol.has_point()) {
    sol.objective = model.objective_value(sol.values);
    sol.status = limit_hit ? SolveStatus::LimitReached : SolveStatus::Optimal;
    const double b = std::min(best_open, incumbent);
    sol.bound = maximize ? -b : b;
  } else {
    sol.status = limit_hit ? SolveStatus::LimitReached : SolveStatus::Infeasible;
  }
  return sol;
}

}  // namespace

Solution solve_milp(const MilpModel& model, const SolverConfig& config) {
  return branch_and_bound(model, {}, config);
}

Solution solve_with_ball_cuts(MilpModel model, std::span<const int> ball_vars, double radius,
                              const SolverConfig& config) {
  config.validate();
  std::vector<Group> groups{{std::vector<int>(ball_vars.begin(), ball_vars.end()), radius}};
  for (const BallGroup& g : model.ball_groups()) groups.push_back({g.vars, g.radius});
  return branch_and_bound(std::move(model), groups, config);
}

Solution solve(const MilpModel& model, const SolverConfig& config) {
  if (model.ball_groups().empty()) return solve_milp(model, config);
  config.validate();
  std::vector<Group> groups;
  for (const BallGroup& g : model.ball_groups()) groups.push_back({g.vars, g.radius});
  return branch_and_bound(model, groups, config);
}

namespace {

void write_terms(std::ostream& out, const MilpModel& model, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << " 0 " << model.variable(0).name;
    return;
  }
  for (const Term& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' ' << model.variable(t.var).name;
  }
}

}  // namespace

void write_lp_format(const MilpModel& model, std::ostream& out) {
  out.precision(17);
  out << (model.objective_sense() == ObjectiveSense::Minimize ? "Minimize" : "Maximize")
      << "\n obj:";
  if (model.num_vars() > 0) write_terms(out, model, model.objective().terms);
  if (model.objective().constant != 0.0) {
    out << (model.objective().constant < 0 ? " - " : " + ") << std::abs(model.objective().constant);
  }
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const Constraint& row = model.constraint(i);
    out << ' ' << (row.name.empty() ? "c" : row.name) << '_' << i << ':';
    write_terms(out, model, row.terms);
    switch (row.sense) {
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
      case RowSense::Equal: out << " = "; break;
    }
    out << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (const Variable& v : model.variables()) {
    if (v.type == VarType::Binary) continue;
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      out << ' ' << v.name << " free\n";
      continue;
    }
    out << ' ';
    if (std::isfinite(v.lower)) out << v.lower; else out << "-inf";
    out << " <= " << v.name << " <= ";
    if (std::isfinite(v.upper)) out << v.upper; else out << "+inf";
    out << '\n';
  }
  bool any_binary = false;
  for (const Variable& v : model.variables()) {
    if (v.type != VarType::Binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << v.name << '\n';
  }
  out << "End\n";
}

}  // namespace clearn::milp
