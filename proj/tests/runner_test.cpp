#include "clearn/runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace clearn::runner {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("clearn_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

// A cheap grid: Beale, small N, a tiny MLP.
RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.functions = {{"Beale", 0}};
  c.sizes = {60};
  c.seeds = RunConfig::default_seeds(1);
  c.model_config.hidden = {6};
  c.model_config.epochs = 60;
  c.domains = {make_domain(vdom::DomainKind::Box), make_domain(vdom::DomainKind::CH)};
  c.output_dir = out;
  c.record_timings = false;
  return c;
}

bench::Dataset dataset_of(Matrix x, const std::function<double(const Vector&)>& h) {
  bench::Dataset d;
  d.clean_values.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) d.clean_values(i) = h(x.row(i).transpose());
  d.noisy_values = d.clean_values;
  d.inputs = std::move(x);
  return d;
}

TEST(RunExperiment, FigureOneThroughTheProblemOverload) {
  Matrix x(4, 1);
  x << 1.0, 1.75, 2.25, 3.0;
  auto h = [](const Vector& v) { return (v(0) - 1.75) * (v(0) - 1.75); };
  Problem problem{Box::uniform(1, 0.0, 4.0), dataset_of(x, h), {}};
  problem.truth.h = [h](const Vector& v) { return Vector::Constant(1, h(v)); };
  problem.truth.x_star = Vector::Constant(1, 1.75);
  const learn::TrainedRegressor line =
      learn::train_regressor(learn::ModelKind::Linear, {}, problem.data, 0);

  ExperimentSpec spec;
  spec.model = learn::ModelKind::Linear;
  spec.domains = {make_domain(vdom::DomainKind::CH), make_domain(vdom::DomainKind::CHplus)};
  const ExperimentResult r = run_experiment(spec, problem, line, nullptr);
  ASSERT_EQ(r.outcomes.size(), 2u);
  ASSERT_TRUE(r.outcomes[0].record.optimal());
  ASSERT_TRUE(r.outcomes[1].record.optimal());
  EXPECT_NEAR(r.outcomes[0].x_hat(0), 1.0, 1e-6);
  EXPECT_NEAR(r.outcomes[1].x_hat(0), 1.375, 1e-6);
  EXPECT_TRUE(r.violations.empty());
}

TEST(RunExperiment, PerfectSurrogateHasZeroErrors) {
  // Linear truth, noiseless data containing the minimizing corner of X.
  auto h = [](const Vector& v) { return 2.0 * v(0) - v(1) + 3.0; };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(24, 2);
  x.topRows(4) << 0, 0, 0, 1, 1, 0, 1, 1;
  for (Eigen::Index i = 4; i < x.rows(); ++i) x.row(i) << u(rng), u(rng);
  Problem problem{Box::uniform(2, 0.0, 1.0), dataset_of(x, h), {}};
  problem.truth.h = [h](const Vector& v) { return Vector::Constant(1, h(v)); };
  problem.truth.x_star = (Vector(2) << 0.0, 1.0).finished();
  problem.truth.v_star = 2.0;
  const learn::TrainedRegressor model =
      learn::train_regressor(learn::ModelKind::Linear, {}, problem.data, 0);

  ExperimentSpec spec;
  spec.model = learn::ModelKind::Linear;
  spec.domains = {make_domain(vdom::DomainKind::Box), make_domain(vdom::DomainKind::CH),
                  make_domain(vdom::DomainKind::CHplus)};
  const ExperimentResult r = run_experiment(spec, problem, model, nullptr);
  for (const DomainOutcome& o : r.outcomes) {
    ASSERT_TRUE(o.record.optimal()) << o.domain;
    EXPECT_NEAR(*o.record.function_value, 0.0, 1e-8) << o.domain;
    EXPECT_NEAR(*o.record.optimal_value, 0.0, 1e-8) << o.domain;
    EXPECT_NEAR(*o.record.optimal_solution, 0.0, 1e-8) << o.domain;
    EXPECT_FALSE(o.record.feasibility.has_value());
  }
}

TEST(RunExperiment, BadSpecBecomesFailedRecords) {
  ExperimentSpec spec;
  spec.function = "NoSuchFunction";
  spec.domains = {make_domain(vdom::DomainKind::Box), make_domain(vdom::DomainKind::CH)};
  const ExperimentResult r = run_experiment(spec);
  ASSERT_EQ(r.outcomes.size(), 2u);
  for (const DomainOutcome& o : r.outcomes) {
    EXPECT_EQ(o.record.status, metrics::RecordStatus::Failed);
    EXPECT_FALSE(o.message.empty());
  }
}

TEST(Grid, ExpansionOrderSeedsFastest) {
  RunConfig c;
  c.functions = {{"Beale", 0}, {"Rastrigin", 3}};
  c.samplings = {bench::SamplingKind::Uniform, bench::SamplingKind::Normal};
  c.sizes = {100, 200};
  c.seeds = RunConfig::default_seeds(3);
  c.domains = {make_domain(vdom::DomainKind::Box)};
  const std::vector<ExperimentSpec> specs = expand_grid(c);
  ASSERT_EQ(specs.size(), 2u * 2u * 2u * 3u);
  EXPECT_EQ(specs[0].seed, 2023u);
  EXPECT_EQ(specs[1].seed, 2024u);
  EXPECT_EQ(specs[3].n, 200);
  EXPECT_EQ(specs[6].sampling, bench::SamplingKind::Normal);
  EXPECT_EQ(specs[12].function_label(), "Rastrigin@3");
  EXPECT_EQ(RunConfig::default_seeds(20).back(), 2042u);
}

TEST(Config, ParsesGridAndRejectsUnknownKeys) {
  const RunConfig c = parse_run_config(R"({
    "functions": ["Beale", {"name": "Rastrigin", "n1": 5}],
    "sampling": ["Normal"],
    "n": [500], "sigma": [0.1],
    "seeds": {"first": 2023, "count": 4},
    "models": ["Mlp"],
    "domains": ["Box", "CH", {"kind": "CHeps", "epsilon": 0.05, "norm": "L1"}, "CHplus"],
    "model": {"hidden": [10, 10]},
    "solver": {"node_limit": 5000},
    "parallel": 2,
    "record_timings": false
  })");
  ASSERT_EQ(c.functions.size(), 2u);
  EXPECT_EQ(c.functions[1].n1, 5);
  EXPECT_EQ(c.seeds.size(), 4u);
  EXPECT_EQ(c.seeds.back(), 2026u);
  ASSERT_EQ(c.domains.size(), 4u);
  EXPECT_EQ(c.domains[2].label(), "CHeps(0.05 L1)");
  EXPECT_TRUE(c.domains[3].append_objective);
  EXPECT_EQ(c.solver.node_limit, 5000);
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_FALSE(c.record_timings);

  EXPECT_THROW(parse_run_config(R"({"sedes": [1]})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"solver": {"gap": 0.1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"parallel": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"n": "many"})"), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_EQ(parse_run_config("{}").domains.size(), 4u);
}

TEST(Suite, OneSpecTwoDomainsGivesTwoRows) {
  const fs::path dir = scratch_dir("two_rows");
  const SuiteSummary s = run_suite(small_config(dir));
  EXPECT_EQ(s.experiments, 1);
  EXPECT_EQ(s.records, 2);
  const std::string csv = slurp(s.csv);
  EXPECT_EQ(count_lines(csv), 3);  // header + 2 rows
  EXPECT_TRUE(fs::exists(s.report));
  EXPECT_TRUE(fs::exists(s.manifest));
  EXPECT_NE(slurp(s.manifest).find("\"seeds\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(Suite, RerunsAreByteIdentical) {
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  RunConfig c = small_config(a);
  c.seeds = RunConfig::default_seeds(2);
  c.domains.push_back(make_domain(vdom::DomainKind::CHplus));
  run_suite(c);
  c.output_dir = b;
  c.parallelism = 2;
  run_suite(c);
  const std::string first = slurp(a / "results.csv");
  EXPECT_EQ(count_lines(first), 7);
  EXPECT_EQ(first, slurp(b / "results.csv"));
  EXPECT_EQ(slurp(a / "report.md"), slurp(b / "report.md"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Suite, BoxColumnIsOne) {
  RunConfig c = small_config(scratch_dir("unused"));
  c.functions = {{"Beale", 0}, {"Peaks", 0}};
  c.seeds = RunConfig::default_seeds(3);
  const std::vector<ExperimentResult> results = run_specs(expand_grid(c), 1);
  const std::vector<metrics::LabeledRecord> labeled = label_records(results);
  for (metrics::ErrorType e : {metrics::ErrorType::FunctionValue, metrics::ErrorType::OptimalValue,
                               metrics::ErrorType::OptimalSolution}) {
    const metrics::AggregateTable t = metrics::aggregate(labeled, e, metrics::Statistic::Median);
    ASSERT_EQ(t.groups.size(), 2u);
    for (const std::string& g : t.groups) {
      const metrics::Cell& box = t.at(g, "Box");
      if (box.defined) EXPECT_DOUBLE_EQ(box.value, 1.0) << g;
    }
  }
}

CsvRow row(const std::string& domain, std::uint64_t seed, double fv) {
  CsvRow r;
  r.function = "Beale";
  r.sampling = "Uniform";
  r.n = 500;
  r.sigma = 0.1;
  r.seed = seed;
  r.model = "MLP";
  r.domain = domain;
  r.record.status = metrics::RecordStatus::Optimal;
  r.record.function_value = fv;
  r.record.optimal_value = 2.0 * fv;
  r.record.optimal_solution = 0.5;
  return r;
}

TEST(Csv, RoundTripAndColumnErrors) {
  ExperimentResult res;
  res.spec.function = "Rastrigin";
  res.spec.n1 = 5;
  res.spec.sigma = 0.05;
  DomainOutcome ok;
  ok.domain = "CHeps(0.1 L2)";
  ok.record.status = metrics::RecordStatus::Optimal;
  ok.record.function_value = 0.1 + 0.2;
  ok.record.optimal_value = 1e-300;
  ok.record.optimal_solution = 3.0;
  ok.record.solve_seconds = 1.5;
  DomainOutcome bad;
  bad.domain = "CH";
  bad.record.status = metrics::RecordStatus::LimitReached;
  res.outcomes = {ok, bad};

  std::stringstream s;
  write_csv_header(s);
  write_csv_rows(s, res, true);
  const std::vector<CsvRow> rows = read_csv(s);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].function, "Rastrigin@5");
  EXPECT_EQ(rows[0].domain, "CHeps(0.1 L2)");
  EXPECT_EQ(*rows[0].record.function_value, 0.1 + 0.2);
  EXPECT_EQ(*rows[0].record.optimal_value, 1e-300);
  EXPECT_FALSE(rows[0].record.feasibility.has_value());
  EXPECT_EQ(rows[0].record.solve_seconds, 1.5);
  EXPECT_EQ(rows[1].record.status, metrics::RecordStatus::LimitReached);
  EXPECT_FALSE(rows[1].record.function_value.has_value());

  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_csv(in);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("function,sampling,size\n").find("'size'"), std::string::npos);
  std::string header;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) header += (i ? "," : "") + kCsvColumns[i];
  EXPECT_NE(message(header + "\nBeale,Uniform,500,abc,1,MLP,Box,,,,,Optimal,0,0\n").find("'sigma'"),
            std::string::npos);
  EXPECT_NE(message(header + "\nBeale,Uniform,500,0,1,MLP,Box,,,,,Done,0,0\n").find("'status'"),
            std::string::npos);
  EXPECT_NE(message(header.substr(0, header.rfind(',')) + "\n").find("solve_seconds"), std::string::npos);
}

TEST(Report, SingleDomainTables) {
  const Report box = emit_report(std::vector<CsvRow>{row("Box", 1, 0.4), row("Box", 2, 0.6)});
  EXPECT_NE(box.markdown.find("| Box | **1.00** |"), std::string::npos);
  const Report ch = emit_report(std::vector<CsvRow>{row("CH", 1, 0.4)});
  EXPECT_NE(ch.markdown.find("| CH | n/a |"), std::string::npos);
}

TEST(Report, RatioSummaryFromPairedRecords) {
  std::vector<CsvRow> rows;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    rows.push_back(row("Box", s, 1.0));
    rows.push_back(row("CH", s, 0.5));
    rows.push_back(row("CHplus", s, 0.5));
  }
  const Report same = emit_report(rows);
  EXPECT_NE(same.markdown.find("| Beale/Uniform | 4 | 0 | 0.00 |"), std::string::npos);
  for (CsvRow& r : rows) {
    if (r.domain == "CHplus") r.record.function_value = 0.25;
  }
  const Report better = emit_report(rows);
  EXPECT_NE(better.markdown.find("| Beale/Uniform | 4 | 0 | 1.00 |"), std::string::npos);
  EXPECT_NE(better.markdown.find("| CHplus | **0.50** |"), std::string::npos);
  EXPECT_FALSE(better.ratio_csv.empty());
}

TEST(Report, ReadsFilesAndNamesThemOnError) {
  const fs::path dir = scratch_dir("report_files");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "function,oops\n";
  try {
    emit_report(std::vector<fs::path>{dir / "bad.csv"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'oops'"), std::string::npos);
  }
  fs::remove_all(dir);
}

// Independent brute force over the same 0.005 grid.
struct BruteForce {
  double p1 = 0, p2 = 0, revenue = -1, demand = 0;

  explicit BruteForce(double cap) {
    for (int i = 0; i <= 600; ++i) {
      for (int j = 0; j <= 600; ++j) {
        const double a = 6.5 + 0.005 * i, b = 7.5 + 0.005 * j;
        if (b < a + 0.5 - 1e-9 || b > a + 1.5 + 1e-9) continue;
        const double d1 = 1e7 * std::pow(a, -3.2) * std::sqrt(b);
        const double d2 = 1e7 * std::pow(a, 1.5) * std::pow(b, -2.2);
        if (d1 + d2 > cap) continue;
        if (a * d1 + b * d2 > revenue) {
          p1 = a;
          p2 = b;
          revenue = a * d1 + b * d2;
          demand = d1 + d2;
        }
      }
    }
  }
};

TEST(PriceModel, OracleMatchesBruteForce) {
  for (double cap : {1.8e6, 1.75e6}) {
    PriceModel pm;
    pm.cap = cap;
    const GridOptimum g = price_oracle(pm);
    const BruteForce bf(cap);
    ASSERT_TRUE(g.found);
    EXPECT_NEAR(g.p(0), bf.p1, 1e-9);
    EXPECT_NEAR(g.p(1), bf.p2, 1e-9);
    EXPECT_NEAR(g.revenue, bf.revenue, 1e-6 * bf.revenue);
    EXPECT_GT(bf.demand, 0.99 * cap);  // the cap binds
  }
}

TEST(PriceModel, RecordsAreOptimalAndPriceFeasible) {
  StylizedPriceConfig c;
  c.seeds = RunConfig::default_seeds(2);
  const StylizedResult r = run_stylized_price(c);
  ASSERT_EQ(r.experiments.size(), 2u);
  for (const ExperimentResult& e : r.experiments) {
    ASSERT_EQ(e.outcomes.size(), 3u);
    for (const DomainOutcome& o : e.outcomes) {
      ASSERT_TRUE(o.record.optimal()) << o.domain << " " << o.message;
      EXPECT_TRUE(c.model.price_feasible(o.x_hat));
      EXPECT_TRUE(o.record.feasibility.has_value());
    }
  }
}

TEST(NormModel, FeasibleCountsSitInTheBinomialBand) {
  StylizedNormConfig c;
  c.seeds = RunConfig::default_seeds(4);
  c.model_config.hidden = {6};
  c.model_config.epochs = 30;
  c.domains = {make_domain(vdom::DomainKind::Box)};
  const StylizedResult r = run_stylized_norm(c);
  ASSERT_EQ(r.feasible_counts.size(), 4u);
  // N = 1000, p = 1/2: 500 +- 2.576 * sqrt(250)
  for (int k : r.feasible_counts) {
    EXPECT_GE(k, 460);
    EXPECT_LE(k, 540);
  }
  for (const ExperimentResult& e : r.experiments) {
    EXPECT_EQ(e.spec.function_label(), "norm@5");
    EXPECT_TRUE(e.outcomes[0].record.feasibility.has_value() || !e.outcomes[0].record.optimal());
  }
}

}  // namespace
}  // namespace clearn::runner
