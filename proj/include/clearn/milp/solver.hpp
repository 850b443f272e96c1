#pragma once

#include "clearn/milp/model.hpp"

#include <iosfwd>
#include <span>

namespace clearn::milp {

/// Solves the LP relaxation (binaries relaxed to [0,1]) with a bounded-variable
/// primal simplex. Throws NumericError when the basis becomes singular.
Solution solve_lp(const MilpModel& model, const SolverConfig& config = {});

/// Best-bound branch-and-bound over LP relaxations, branching on the most
/// fractional binary (lowest index on ties). Ball groups are ignored here;
/// use solve() or solve_with_ball_cuts() for those.
Solution solve_milp(const MilpModel& model, const SolverConfig& config = {});

/// Branch-and-bound with ||v||_2 <= radius enforced by outer approximation:
/// an integral node LP point outside the ball gets the tangent cut
/// (v/||v||)^T v <= radius and is solved again. Cuts stay for all later nodes.
Solution solve_with_ball_cuts(MilpModel model, std::span<const int> ball_vars, double radius,
                              const SolverConfig& config = {});

/// Branch-and-bound that enforces every registered ball group with tangent
/// cuts; plain branch-and-bound when there are none.
Solution solve(const MilpModel& model, const SolverConfig& config = {});

/// Writes the model in CPLEX LP text format.
void write_lp_format(const MilpModel& model, std::ostream& out);

}  // namespace clearn::milp
