#pragma once

#include "clearn/bench.hpp"
#include "clearn/learn/isolation_forest.hpp"
#include "clearn/learn/regressor.hpp"
#include "clearn/metrics.hpp"
#include "clearn/milp/model.hpp"
#include "clearn/vdom.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace clearn::runner {

/// One point of the design grid (f, R, N, sigma, s, M) plus the domains to
/// compare on it.
struct ExperimentSpec {
  std::string function = "Beale";
  int n1 = 0;  // 0 selects the function's default dimension
  bench::SamplingKind sampling = bench::SamplingKind::Uniform;
  int n = 500;
  double sigma = 0.0;
  std::uint64_t seed = 2023;
  learn::ModelKind model = learn::ModelKind::Mlp;
  learn::RegressorConfig model_config;
  /// Isolation forest for IsoFor domains. max_depth <= 0 picks 5 for Beale
  /// and Peaks and 6 otherwise; an IsoFor spec with depth 0 uses max_depth.
  learn::IsolationForestConfig isofor{10, 0, 256};
  std::vector<vdom::ValidityDomainSpec> domains;
  milp::SolverConfig solver;

  /// Function name, with "@n1" appended when the dimension is explicit.
  std::string function_label() const;
};

/// Outcome of one domain on one experiment.
struct DomainOutcome {
  std::string domain;
  vdom::DomainKind kind = vdom::DomainKind::Box;
  metrics::ErrorRecord record;
  Vector x_hat;          // empty unless Optimal
  double v_hat = 0.0;    // surrogate optimum
  long nodes = 0;
  std::string message;   // exception text for Failed records
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<DomainOutcome> outcomes;
  double train_seconds = 0.0;
  /// Broken run-level invariants (projection containment, ordering, IsoFor
  /// depth). Empty on a healthy run.
  std::vector<std::string> violations;
};

/// A fully specified instance: data already sampled, truth known.
struct Problem {
  Box box;
  bench::Dataset data;
  metrics::TrueModel truth;
};

/// Samples, trains, then solves min f_hat(x) over X and each domain.
/// Deterministic given the ExperimentSpec. Failures become records with a non-Optimal
/// status; the remaining domains still run.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Same loop with a given problem and trained surrogate. The forest is only
/// needed for IsoFor domains.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Problem& problem,
                                const learn::TrainedRegressor& model,
                                const learn::IsolationForestModel* forest);

/// Grid definition and execution settings of a suite.
struct RunConfig {
  struct FunctionEntry {
    std::string name;
    int n1 = 0;
  };
  std::vector<FunctionEntry> functions{{"Beale", 0}};
  std::vector<bench::SamplingKind> samplings{bench::SamplingKind::Uniform};
  std::vector<int> sizes{500};
  std::vector<double> sigmas{0.0};
  std::vector<std::uint64_t> seeds = default_seeds(20);
  std::vector<learn::ModelKind> models{learn::ModelKind::Mlp};
  std::vector<vdom::ValidityDomainSpec> domains;
  learn::RegressorConfig model_config;
  learn::IsolationForestConfig isofor{10, 0, 256};
  milp::SolverConfig solver;
  int parallelism = 1;
  std::filesystem::path output_dir = "results";
  /// When false, timing columns are written as 0 so reruns are byte-identical.
  bool record_timings = true;

  /// 2023, 2024, ...
  static std::vector<std::uint64_t> default_seeds(int count);
  void validate() const;
};

/// Parses a JSON run configuration. Unknown keys are rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Grid in (f, R, N, sigma, M, s) order, seeds varying fastest.
std::vector<ExperimentSpec> expand_grid(const RunConfig& config);

/// Runs the experiments on up to `parallelism` threads; results keep input order.
std::vector<ExperimentResult> run_specs(const std::vector<ExperimentSpec>& specs, int parallelism);

struct SuiteSummary {
  std::filesystem::path csv;
  std::filesystem::path report;
  std::filesystem::path manifest;
  int experiments = 0;
  int records = 0;
  int failures = 0;  // non-Optimal records
  std::vector<std::string> violations;
};

/// Runs the grid and writes results.csv, report.md and manifest.json into
/// the output directory.
SuiteSummary run_suite(const RunConfig& config);

// CSV: function,sampling,n,sigma,seed,model,domain, four errors, status,
// setup_seconds,solve_seconds. Absent errors are empty fields.
extern const std::vector<std::string> kCsvColumns;

struct CsvRow {
  std::string function;
  std::string sampling;
  int n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string model;
  std::string domain;
  metrics::ErrorRecord record;
};

void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const ExperimentResult& result, bool record_timings);
/// Throws ParseError naming the offending column.
std::vector<CsvRow> read_csv(std::istream& in);

struct Report {
  std::string markdown;
  /// log10 ratio histograms of CHplus over CH function value errors, as CSV.
  std::string ratio_csv;
};

/// Table per error type (groups = function/sampling, Box-normalized medians)
/// plus CHplus/CH ratio summaries when both domains are present.
Report emit_report(const std::vector<CsvRow>& rows);
Report emit_report(const std::vector<std::filesystem::path>& csv_files);

/// Norm-constrained model: min c^T x s.t. h_hat(x) <= 1 with h = ||.||,
/// samples with radius uniform in [0.5, 1.5] and X = [-1.5, 1.5]^n1.
struct StylizedNormConfig {
  int n1 = 5;
  int n = 1000;
  double noise = 0.05;
  std::vector<std::uint64_t> seeds = RunConfig::default_seeds(20);
  std::vector<vdom::ValidityDomainSpec> domains;  // empty: Box, CH, CHplus, CHplusEps 0.05/0.10
  learn::RegressorConfig model_config;
  milp::SolverConfig solver;
};

struct StylizedResult {
  std::vector<ExperimentResult> experiments;
  std::vector<int> feasible_counts;  // per seed, norm model only
};

StylizedResult run_stylized_norm(const StylizedNormConfig& config);

/// Two-product price model: maximize p1 d1 + p2 d2 over the price box with
/// p1 + 0.5 <= p2 <= p1 + 1.5 and d1 + d2 <= cap, where
/// d1 = 1e7 p1^-3.2 p2^0.5 and d2 = 1e7 p1^1.5 p2^-2.2.
struct PriceModel {
  double cap = 1.8e6;
  double step = 0.005;

  Vector demand(const Eigen::Ref<const Vector>& p) const;
  bool price_feasible(const Eigen::Ref<const Vector>& p) const;
  Box box() const;
};

struct GridOptimum {
  Vector p;
  double revenue = 0.0;
  bool found = false;
};

/// Grid search of the true model.
GridOptimum price_oracle(const PriceModel& model);

struct StylizedPriceConfig {
  PriceModel model;
  int n = 1000;
  std::vector<std::uint64_t> seeds = RunConfig::default_seeds(100);
  std::vector<vdom::ValidityDomainSpec> domains;  // empty: Box, CH, CHplus (4-D, all, no phi)
  int parallelism = 1;
};

StylizedResult run_stylized_price(const StylizedPriceConfig& config);

/// Labeled records for aggregation: group = function/sampling, instance =
/// the remaining design options.
std::vector<metrics::LabeledRecord> label_records(const std::vector<ExperimentResult>& results);

/// Default domain lists.
std::vector<vdom::ValidityDomainSpec> default_benchmark_domains();
vdom::ValidityDomainSpec make_domain(vdom::DomainKind kind, double epsilon = 0.0);

}  // namespace clearn::runner
