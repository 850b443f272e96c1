#pragma once

#include "clearn/milp/model.hpp"

#include <chrono>
#include <vector>

namespace clearn::milp::detail {

using Clock = std::chrono::steady_clock;

/// Dense, equilibrated copy of a model's rows in minimization form.
/// Scaled quantities: A~ = R A C, b~ = R b, x = C x~, cost~ = C cost / cost_scale.
struct LpData {
  int m = 0;
  int n = 0;
  Matrix a;
  Vector b;
  Vector cost;
  Vector row_scale;
  Vector col_scale;
  double cost_scale = 1.0;
  std::vector<RowSense> sense;

  explicit LpData(const MilpModel& model);
};

struct LpOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  Vector x;  // structural values in model units
  Vector duals;  // row prices of the minimization form, model units
  long iterations = 0;
};

/// Bounded-variable revised primal simplex (two phases, artificial start,
/// Harris ratio test, Bland's rule after a run of degenerate pivots).
LpOutcome solve_bounded_lp(const LpData& data, const Vector& lower, const Vector& upper,
                           const SolverConfig& config, Clock::time_point deadline);

}  // namespace clearn::milp::detail
