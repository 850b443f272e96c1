#pragma once

#include "clearn/bench.hpp"
#include "clearn/common.hpp"
#include "clearn/learn/isolation_forest.hpp"
#include "clearn/milp/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Validity domains over sampled data, all in V-representation:
//
//   Box       data min <= x <= data max
//   CH        x = sum l_i x_i, l >= 0, sum l = 1
//   CHeps     x = u + v, u in CH, ||v|| <= r
//   IsoFor    every isolation tree routes x to a leaf of depth >= d
//   CHplus    (x, y_J, phi) = sum l_i (x_i, y_iJ, phi_i) over the chosen rows
//   CHplusEps CHplus enlarged by the same ball
//
// Enlargements live in a normalized space: x coordinates are divided by the
// width of X, y and phi coordinates by their data range (1 when constant).
// The ball radius is epsilon * sqrt(n1), which is epsilon * diam(X) in
// original units whenever X is a cube.
namespace clearn::vdom {

/// Sampled inputs together with output tuples y, objective values phi and
/// feasibility flags.
struct ExtendedDataset {
  bench::Dataset base;
  Matrix outputs;   // N x n2, possibly zero columns
  Vector objective; // N
  std::vector<bool> feasible;

  int size() const { return base.size(); }
  int n1() const { return base.dim(); }
  int n2() const { return static_cast<int>(outputs.cols()); }
  int feasible_count() const;
};

/// Decides whether a sample (x, y) counts as feasible. An empty rule accepts
/// every sample.
using FeasibilityRule = std::function<bool(const Vector& x, const Vector& y)>;

ExtendedDataset build_extended_dataset(const bench::Dataset& dataset, Matrix outputs,
                                       Vector objective, const FeasibilityRule& rule = {});

enum class DomainKind { Box, CH, CHeps, IsoFor, CHplus, CHplusEps };
enum class Norm { L1, L2, Linf };
enum class DataSubset { FeasibleOnly, All };

DomainKind parse_domain_kind(std::string_view name);
std::string_view domain_kind_name(DomainKind kind);
Norm parse_norm(std::string_view name);
std::string_view norm_name(Norm norm);

struct ValidityDomainSpec {
  DomainKind kind = DomainKind::Box;
  double epsilon = 0.0;            // fraction of diam(X)
  Norm norm = Norm::L2;
  std::vector<int> output_subset;  // J, indices into the y columns
  /// Defaults to FeasibleOnly for CHplus kinds and All otherwise.
  std::optional<DataSubset> data_subset;
  bool append_objective = false;
  int isofor_depth = 0;

  /// Identifier used in CSV files and tables, e.g. "CHplus" or
  /// "CHeps(0.05 L2)". Never contains commas.
  std::string label() const;
  void validate(int n2) const;

  DataSubset subset() const;
  bool enlarged() const { return kind == DomainKind::CHeps || kind == DomainKind::CHplusEps; }
  bool extended() const { return kind == DomainKind::CHplus || kind == DomainKind::CHplusEps; }
};

/// Information a domain needs beyond the data.
struct DomainContext {
  Box x_box;                                              // X, for the enlargement scale
  const learn::IsolationForestModel* forest = nullptr;    // IsoFor only
};

struct DomainBlock {
  int first_row = 0;
  int end_row = 0;
  std::vector<int> lambda;  // convex multipliers, one per selected data row
  std::vector<int> ball;    // normalized slack v, enlargements only
  bool infeasible = false;  // IsoFor with a tree that has no deep leaf
};

/// Row indices selected by the domain.
std::vector<int> selected_rows(const ValidityDomainSpec& spec, const ExtendedDataset& ext);

/// Bounding box the domain implies for x, intersected with X. Tightening the
/// x bounds to it before embedding keeps big-M values small.
Box implied_box(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                const DomainContext& context);

/// Appends the domain to the model. `y_vars` holds one variable per y column;
/// `objective` is the expression matched against phi when append_objective.
DomainBlock attach_domain(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                          milp::MilpModel& model, std::span<const int> x_vars,
                          std::span<const int> y_vars, const milp::LinearExpr* objective,
                          const DomainContext& context);

struct Membership {
  bool inside = false;
  double residual = 0.0;
  /// For a hull point found outside without enlargement: LP prices of the
  /// coordinate rows, a direction in residual units with max-norm <= 1 along
  /// which the point is farther out than every data tuple. Empty otherwise.
  Vector separator;
};

/// Tests a point. For hulls this solves the least-violation LP; x
/// residuals are in original units, y and phi residuals are divided by
/// max(1, data range). `tuple` carries (y_J, phi) values for extended kinds.
Membership membership_test(const ValidityDomainSpec& spec, const ExtendedDataset& ext,
                           const Eigen::Ref<const Vector>& point,
                           const Eigen::Ref<const Vector>& tuple, const DomainContext& context,
                           double tol = 1e-6);

/// Outer polyhedral screen of a non-enlarged hull domain: support values of
/// the data in the coordinate axes and `directions` random directions, in the
/// residual units of membership_test. excludes() holds only for points whose
/// membership residual exceeds tol, so it can skip LPs without changing any
/// answer. Other domain kinds never exclude.
class HullScreen {
 public:
  HullScreen(const ValidityDomainSpec& spec, const ExtendedDataset& ext, const DomainContext& context,
             int directions = 256, std::uint64_t seed = 0);

  bool excludes(const Eigen::Ref<const Vector>& point, const Eigen::Ref<const Vector>& tuple,
                double tol = 1e-6) const;

  /// Adds a direction, typically Membership::separator. Its support value is
  /// recomputed from the data, so any direction keeps the screen sound.
  void add_direction(const Eigen::Ref<const Vector>& direction);

 private:
  Matrix data_;     // scaled tuples, one per row
  Matrix dirs_;     // one direction per row, max-norm 1
  Vector support_;  // max over data rows of dirs_ * d_i
  Vector unit_;     // residual unit per coordinate
  int n1_ = 0;
};

}  // namespace clearn::vdom
