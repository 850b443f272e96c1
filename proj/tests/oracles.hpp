#pragma once

// Independent reference solvers used only by tests. Nothing here calls the
// simplex or branch-and-bound code.

#include "clearn/milp/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace clearn::oracle {

struct Halfspace {
  Eigen::VectorXd a;
  double b;        // a.x <= b (or == b when equality)
  bool equality;
};

/// Vertex enumeration for a bounded polyhedron: every choice of n active
/// constraints (equalities always active) is solved, filtered for
/// feasibility, and the best objective kept. Returns nullopt if infeasible.
inline std::optional<double> enumerate_vertices(const std::vector<Halfspace>& rows,
                                                const Eigen::VectorXd& cost, bool maximize,
                                                Eigen::VectorXd* argbest = nullptr,
                                                double tol = 1e-9) {
  const int n = static_cast<int>(cost.size());
  std::vector<int> eq, ineq;
  // Keeps a linearly independent subset of the equalities; the dropped ones
  // are still checked with every other row below.
  Eigen::MatrixXd basis(0, n);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    if (!rows[i].equality) {
      ineq.push_back(i);
      continue;
    }
    Eigen::MatrixXd grown(basis.rows() + 1, n);
    grown << basis, rows[i].a.transpose();
    if (Eigen::FullPivLU<Eigen::MatrixXd>(grown).rank() > basis.rows()) {
      basis = grown;
      eq.push_back(i);
    }
  }
  std::optional<double> best;
  if (n == 0) return 0.0;
  const int need = n - static_cast<int>(eq.size());
  std::vector<int> pick(need);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == need) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      int k = 0;
      for (int i : eq) {
        a.row(k) = rows[i].a.transpose();
        b(k++) = rows[i].b;
      }
      for (int i : pick) {
        a.row(k) = rows[i].a.transpose();
        b(k++) = rows[i].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(b);
      for (const auto& r : rows) {
        const double v = r.a.dot(x) - r.b;
        const double scale = 1.0 + std::abs(r.b);
        if (r.equality ? std::abs(v) > tol * scale * 100 : v > tol * scale * 100) return;
      }
      const double obj = cost.dot(x);
      if (!best || (maximize ? obj > *best : obj < *best)) {
        best = obj;
        if (argbest) *argbest = x;
      }
      return;
    }
    for (int i = start; i < static_cast<int>(ineq.size()); ++i) {
      pick[depth] = ineq[i];
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Converts a model with finite bounds into halfspaces over all variables,
/// with the listed variables fixed to the given values.
inline std::vector<Halfspace> to_halfspaces(const milp::MilpModel& model) {
  const int n = model.num_vars();
  std::vector<Halfspace> out;
  for (const auto& row : model.constraints()) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& t : row.terms) a(t.var) += t.coef;
    switch (row.sense) {
      case milp::RowSense::LessEqual: out.push_back({a, row.rhs, false}); break;
      case milp::RowSense::GreaterEqual: out.push_back({-a, -row.rhs, false}); break;
      case milp::RowSense::Equal: out.push_back({a, row.rhs, true}); break;
    }
  }
  for (int j = 0; j < n; ++j) {
    const auto& v = model.variable(j);
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
    if (v.lower == v.upper) {
      out.push_back({e, v.lower, true});
      continue;
    }
    out.push_back({e, v.upper, false});
    out.push_back({-e, -v.lower, false});
  }
  return out;
}

inline std::optional<double> brute_force_milp(const milp::MilpModel& model) {
  std::vector<int> bins;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.variable(j).type == milp::VarType::Binary) bins.push_back(j);
  }
  const bool maximize = model.objective_sense() == milp::ObjectiveSense::Maximize;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(model.num_vars());
  for (const auto& t : model.objective().terms) cost(t.var) += t.coef;
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << bins.size()); ++mask) {
    milp::MilpModel fixed = model;
    for (std::size_t k = 0; k < bins.size(); ++k) fixed.fix(bins[k], (mask >> k) & 1u);
    const auto v = enumerate_vertices(to_halfspaces(fixed), cost, maximize);
    if (v && (!best || (maximize ? *v > *best : *v < *best))) best = v;
  }
  if (best) *best += model.objective().constant;
  return best;
}

}  // namespace clearn::oracle
