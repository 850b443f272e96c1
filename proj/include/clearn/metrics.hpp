#pragma once

#include "clearn/bench.hpp"
#include "clearn/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clearn::metrics {

enum class RecordStatus { Optimal, Infeasible, Unbounded, LimitReached, Failed };

std::string_view status_name(RecordStatus status);
RecordStatus parse_status(std::string_view name);

enum class ErrorType { FunctionValue, OptimalValue, OptimalSolution, Feasibility };

std::string_view error_name(ErrorType type);
inline constexpr ErrorType kErrorTypes[] = {ErrorType::FunctionValue, ErrorType::OptimalValue,
                                            ErrorType::OptimalSolution, ErrorType::Feasibility};

/// Errors of one solve. Values are absent unless the status is Optimal;
/// feasibility is also absent for problems without a theta map.
struct ErrorRecord {
  RecordStatus status = RecordStatus::Failed;
  std::optional<double> function_value;
  std::optional<double> optimal_value;
  std::optional<double> optimal_solution;
  std::optional<double> feasibility;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;

  bool optimal() const { return status == RecordStatus::Optimal; }
  std::optional<double> error(ErrorType type) const;
};

using VectorMap = std::function<Vector(const Vector&)>;

/// Noiseless truth to score a solve against.
struct TrueModel {
  VectorMap h;       // true outputs at x
  Vector x_star;
  double v_star = 0.0;
  VectorMap theta;   // constraint map on outputs, <= 0 when feasible; may be empty
};

/// Benchmark truth: h = f, no constraint map.
TrueModel true_model(const bench::GroundTruth& gt);

/// ||y_hat - h(x_hat)||, |v_hat - v*|, ||x_hat - x*|| and ||max(0, theta(h(x_hat)))||,
/// all Euclidean.
ErrorRecord compute_errors(const Eigen::Ref<const Vector>& x_hat, const Eigen::Ref<const Vector>& y_hat,
                           double v_hat, const TrueModel& truth);

/// Record carrying only a non-optimal status.
ErrorRecord failed_record(RecordStatus status);

enum class Statistic { Median, Mean };

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

/// One record with its table coordinates. `instance` identifies the paired
/// unit (for example the seed) so domains are compared on the same instances.
struct LabeledRecord {
  std::string group;
  std::string domain;
  std::string instance;
  ErrorRecord record;
};

struct Cell {
  double value = 0.0;   // statistic divided by the reference statistic
  double raw = 0.0;     // statistic before normalization
  bool defined = false; // false when the reference statistic is 0 or no data
  bool minimum = false;
};

struct AggregateTable {
  ErrorType error = ErrorType::FunctionValue;
  Statistic statistic = Statistic::Median;
  std::vector<std::string> groups;   // in first-seen order
  std::vector<std::string> domains;  // in first-seen order
  std::vector<std::vector<Cell>> cells;  // [group][domain]
  std::vector<int> instances;        // instances kept per group
  std::vector<int> dropped;          // instances dropped per group

  const Cell& at(std::string_view group, std::string_view domain) const;
};

/// Per group, the statistic of each domain divided by the reference
/// domain's. An instance enters a group only if every domain of that group
/// has the error for it; the others are counted in `dropped`. Every minimum
/// cell is marked, ties included. A group without the reference domain throws
/// ArgumentError, or with `require_reference` false keeps undefined cells.
AggregateTable aggregate(const std::vector<LabeledRecord>& records, ErrorType error,
                         Statistic statistic, std::string_view reference = "Box",
                         bool require_reference = true);

/// Markdown rendering with domains as rows and groups as columns. Minimum
/// cells are bold; undefined cells print as "n/a".
std::string to_markdown(const AggregateTable& table);

struct RatioStats {
  int count = 0;            // ratios used
  int zero_denominators = 0;
  int zero_numerators = 0;  // ratio 0, kept for the fraction but not on log scale
  double fraction_below_one = 0.0;
  double skewness = 0.0;    // of log10 ratios
  double kurtosis = 0.0;    // of log10 ratios, non-excess (normal = 3)
  std::vector<double> log10_edges;
  std::vector<int> histogram;
};

/// Elementwise ratios numerator/denominator. Throws ArgumentError on length
/// mismatch and DataError when every denominator is zero.
RatioStats ratio_distribution_stats(const std::vector<double>& numerator,
                                    const std::vector<double>& denominator, int bins = 20);

/// Population moments: E[(x-m)^3]/s^3 and E[(x-m)^4]/s^4.
double skewness(const std::vector<double>& values);
double kurtosis(const std::vector<double>& values);

}  // namespace clearn::metrics
