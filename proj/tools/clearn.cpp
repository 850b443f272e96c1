// clearn: experiment suites, stylized models, reports and self-checks.

#include "clearn/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace clearn;

namespace {

// Writes records of stylized runs as results.csv plus report.md.
void write_outputs(const std::vector<runner::ExperimentResult>& results, const fs::path& dir,
                   bool timings) {
  fs::create_directories(dir);
  std::ostringstream csv;
  runner::write_csv_header(csv);
  for (const auto& r : results) runner::write_csv_rows(csv, r, timings);
  std::ofstream(dir / "results.csv") << csv.str();
  std::istringstream in(csv.str());
  const runner::Report report = runner::emit_report(runner::read_csv(in));
  std::ofstream(dir / "report.md") << report.markdown;
  std::cout << report.markdown;
  std::cout << "wrote " << (dir / "results.csv").string() << " and " << (dir / "report.md").string() << "\n";
}

int print_messages(const std::vector<runner::ExperimentResult>& results) {
  int failures = 0;
  for (const auto& r : results) {
    for (const auto& o : r.outcomes) {
      if (!o.message.empty()) {
        std::cerr << r.spec.function_label() << " seed " << r.spec.seed << " " << o.domain << ": "
                  << o.message << "\n";
      }
      failures += o.record.optimal() ? 0 : 1;
    }
    for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
  }
  return failures;
}

bool check(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
  return ok;
}

// Quick invariant suite: the 1-D hull example, the price grid, and a small
// Beale run with run-level invariants asserted.
int selftest(int seeds) {
  bool ok = true;
  {
    Matrix x(4, 1);
    x << 1.0, 1.75, 2.25, 3.0;
    runner::Problem p{Box::uniform(1, 0.0, 4.0), {}, {}};
    p.data.inputs = x;
    p.data.clean_values = (x.col(0).array() - 1.75).square().matrix();
    p.data.noisy_values = p.data.clean_values;
    p.truth.h = [](const Vector& v) { return Vector::Constant(1, (v(0) - 1.75) * (v(0) - 1.75)); };
    p.truth.x_star = Vector::Constant(1, 1.75);
    const auto line = learn::train_regressor(learn::ModelKind::Linear, {}, p.data, 0);
    runner::ExperimentSpec spec;
    spec.model = learn::ModelKind::Linear;
    spec.domains = {runner::make_domain(vdom::DomainKind::CH),
                    runner::make_domain(vdom::DomainKind::CHplus)};
    const auto r = runner::run_experiment(spec, p, line, nullptr);
    const bool solved = r.outcomes[0].record.optimal() && r.outcomes[1].record.optimal();
    const double a = solved ? r.outcomes[0].x_hat(0) : NAN;
    const double b = solved ? r.outcomes[1].x_hat(0) : NAN;
    ok &= check("hull-example", solved && std::abs(a - 1.0) < 1e-6 && std::abs(b - 1.375) < 1e-6,
                "x(CH) = " + std::to_string(a) + ", x(CHplus) = " + std::to_string(b));
  }
  {
    const runner::GridOptimum g = runner::price_oracle(runner::PriceModel{});
    const Vector d = runner::PriceModel{}.demand(g.p);
    ok &= check("price-oracle", g.found && d.sum() <= runner::PriceModel{}.cap,
                "p* = (" + std::to_string(g.p(0)) + ", " + std::to_string(g.p(1)) + ")");
  }
  {
    runner::RunConfig c;
    c.functions = {{"Beale", 0}};
    c.samplings = {bench::SamplingKind::Normal};
    c.sigmas = {0.1};
    c.seeds = runner::RunConfig::default_seeds(seeds);
    c.domains = runner::default_benchmark_domains();
    const auto results = runner::run_specs(runner::expand_grid(c), 1);
    int violations = 0, solved = 0, total = 0;
    for (const auto& r : results) {
      violations += static_cast<int>(r.violations.size());
      for (const auto& o : r.outcomes) {
        ++total;
        solved += o.record.optimal() ? 1 : 0;
      }
    }
    print_messages(results);
    ok &= check("run-invariants", violations == 0,
                std::to_string(violations) + " violations, " + std::to_string(solved) + "/" +
                    std::to_string(total) + " solves optimal");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint learning with validity domains"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  std::string config_path;
  int parallel = 0;
  std::string out_dir;
  bool no_timings = false;
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--parallel", parallel, "Concurrent experiments")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--no-timings", no_timings, "Write zero timings for byte-identical reruns");

  auto* norm = app.add_subcommand("stylized-norm", "Norm-constrained stylized model");
  int norm_n1 = 5, norm_seeds = 20;
  std::string norm_out = "results/norm";
  norm->add_option("--n1", norm_n1, "Input dimension")->check(CLI::PositiveNumber);
  norm->add_option("--seeds", norm_seeds, "Seeds from 2023")->check(CLI::PositiveNumber);
  norm->add_option("--out", norm_out, "Output directory");

  auto* price = app.add_subcommand("stylized-price", "Two-product pricing model");
  int price_seeds = 100, price_parallel = 1;
  double cap = 1.8e6;
  std::string price_out = "results/price";
  price->add_option("--seeds", price_seeds, "Seeds from 2023")->check(CLI::PositiveNumber);
  price->add_option("--cap", cap, "Demand cap");
  price->add_option("--parallel", price_parallel, "Concurrent seeds")->check(CLI::PositiveNumber);
  price->add_option("--out", price_out, "Output directory");

  auto* report = app.add_subcommand("report", "Aggregate CSV files into markdown tables");
  std::vector<std::string> csv_files;
  std::string report_out, ratio_out;
  report->add_option("csv", csv_files, "Result CSV files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Markdown output file (default stdout)");
  report->add_option("--ratio-csv", ratio_out, "Ratio histogram output file");

  auto* self = app.add_subcommand("selftest", "Quick invariant checks");
  int self_seeds = 3;
  self->add_option("--seeds", self_seeds, "Seeds of the Beale invariant run")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      runner::RunConfig c = runner::load_run_config(config_path);
      if (parallel > 0) c.parallelism = parallel;
      if (!out_dir.empty()) c.output_dir = out_dir;
      if (no_timings) c.record_timings = false;
      const runner::SuiteSummary s = runner::run_suite(c);
      std::cout << s.experiments << " experiments, " << s.records << " records, " << s.failures
                << " not optimal, " << s.violations.size() << " invariant violations\n";
      for (const auto& v : s.violations) std::cerr << "violation: " << v << "\n";
      std::cout << "wrote " << s.csv.string() << ", " << s.report.string() << ", " << s.manifest.string()
                << "\n";
      return s.violations.empty() ? 0 : 2;
    }
    if (norm->parsed()) {
      runner::StylizedNormConfig c;
      c.n1 = norm_n1;
      c.seeds = runner::RunConfig::default_seeds(norm_seeds);
      const runner::StylizedResult r = runner::run_stylized_norm(c);
      print_messages(r.experiments);
      std::cout << "feasible samples per seed:";
      for (int k : r.feasible_counts) std::cout << " " << k;
      std::cout << "\n";
      write_outputs(r.experiments, norm_out, true);
      return 0;
    }
    if (price->parsed()) {
      runner::StylizedPriceConfig c;
      c.model.cap = cap;
      c.seeds = runner::RunConfig::default_seeds(price_seeds);
      c.parallelism = price_parallel;
      const runner::GridOptimum g = runner::price_oracle(c.model);
      if (g.found) {
        std::cout << "true grid optimum p* = (" << g.p(0) << ", " << g.p(1) << "), revenue " << g.revenue
                  << "\n";
      }
      const runner::StylizedResult r = runner::run_stylized_price(c);
      print_messages(r.experiments);
      write_outputs(r.experiments, price_out, true);
      return 0;
    }
    if (report->parsed()) {
      const std::vector<fs::path> paths(csv_files.begin(), csv_files.end());
      const runner::Report rep = runner::emit_report(paths);
      if (report_out.empty()) {
        std::cout << rep.markdown;
      } else {
        std::ofstream(report_out) << rep.markdown;
      }
      if (!ratio_out.empty()) std::ofstream(ratio_out) << rep.ratio_csv;
      return 0;
    }
    if (self->parsed()) return selftest(self_seeds);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
