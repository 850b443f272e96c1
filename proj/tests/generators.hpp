#pragma once

// Hand-rolled random instance generators for property tests.

#include "clearn/milp/model.hpp"

#include <random>

namespace clearn::gen {

/// Dense random LP/MILP with box-bounded variables so the feasible set is a
/// polytope. Rows mix <=, >= and occasional equalities; a random interior
/// point is used to set right-hand sides so most instances are feasible.
inline milp::MilpModel random_model(std::mt19937_64& rng, int n_cont, int n_bin, int n_rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> sense_pick(0, 9);
  milp::MilpModel m;
  const int n = n_cont + n_bin;
  Eigen::VectorXd anchor(n);
  for (int j = 0; j < n_cont; ++j) {
    const double lo = -3.0 + 2.0 * unit(rng);
    const double hi = lo + 0.5 + 4.0 * unit(rng);
    m.add_variable("x" + std::to_string(j), lo, hi);
    anchor(j) = lo + (hi - lo) * unit(rng);
  }
  for (int j = 0; j < n_bin; ++j) {
    m.add_binary("b" + std::to_string(j));
    anchor(n_cont + j) = unit(rng) < 0.5 ? 0.0 : 1.0;
  }
  for (int i = 0; i < n_rows; ++i) {
    std::vector<milp::Term> terms;
    double at_anchor = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.2) continue;
      const double c = std::round(coef(rng) * 100.0) / 100.0;
      terms.push_back({j, c});
      at_anchor += c * anchor(j);
    }
    const int s = sense_pick(rng);
    const double slack = 2.0 * unit(rng);
    if (s == 0) {
      m.add_constraint(terms, milp::RowSense::Equal, at_anchor);
    } else if (s < 5) {
      m.add_constraint(terms, milp::RowSense::LessEqual, at_anchor + slack);
    } else {
      m.add_constraint(terms, milp::RowSense::GreaterEqual, at_anchor - slack);
    }
  }
  std::vector<milp::Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, std::round(coef(rng) * 100.0) / 100.0});
  m.set_objective(milp::LinearExpr(obj, 0.0),
                  unit(rng) < 0.5 ? milp::ObjectiveSense::Minimize : milp::ObjectiveSense::Maximize);
  return m;
}

}  // namespace clearn::gen
