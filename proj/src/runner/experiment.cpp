#include "clearn/runner.hpp"

#include "clearn/embed.hpp"
#include "clearn/milp/solver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace clearn::runner {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

metrics::RecordStatus record_status(milp::SolveStatus s) {
  switch (s) {
    case milp::SolveStatus::Optimal: return metrics::RecordStatus::Optimal;
    case milp::SolveStatus::Infeasible: return metrics::RecordStatus::Infeasible;
    case milp::SolveStatus::Unbounded: return metrics::RecordStatus::Unbounded;
    case milp::SolveStatus::LimitReached: return metrics::RecordStatus::LimitReached;
  }
  return metrics::RecordStatus::Failed;
}

bool needs_forest(const ExperimentSpec& spec) {
  for (const auto& d : spec.domains) {
    if (d.kind == vdom::DomainKind::IsoFor) return true;
  }
  return false;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

DomainOutcome solve_domain(const ExperimentSpec& spec, const Problem& problem,
                           const learn::TrainedRegressor& model,
                           const vdom::ExtendedDataset& ext, const vdom::DomainContext& context,
                           vdom::ValidityDomainSpec domain) {
  DomainOutcome out;
  out.domain = domain.label();
  out.kind = domain.kind;
  const auto t0 = Clock::now();
  try {
    milp::MilpModel m;
    const Box box = vdom::implied_box(domain, ext, context);
    std::vector<int> x;
    for (int j = 0; j < box.dim(); ++j) {
      x.push_back(m.add_variable("x" + std::to_string(j), box.lower(j), box.upper(j)));
    }
    const embed::EmbeddedOutput emb = embed::embed_regressor(model, x, m);
    const milp::LinearExpr objective = milp::LinearExpr::variable(emb.output);
    vdom::attach_domain(domain, ext, m, x, {}, &objective, context);
    m.set_objective(objective, milp::ObjectiveSense::Minimize);
    out.record.setup_seconds = seconds_since(t0);

    const auto t1 = Clock::now();
    const milp::Solution sol = milp::solve(m, spec.solver);
    const double solve_seconds = seconds_since(t1);
    out.nodes = sol.nodes;
    if (sol.status == milp::SolveStatus::Optimal) {
      out.x_hat.resize(box.dim());
      for (int j = 0; j < box.dim(); ++j) out.x_hat(j) = sol.values(x[j]);
      out.v_hat = sol.objective;
      const Vector y_hat = Vector::Constant(1, model.predict(out.x_hat));
      const double setup = out.record.setup_seconds;
      out.record = metrics::compute_errors(out.x_hat, y_hat, out.v_hat, problem.truth);
      out.record.setup_seconds = setup;
    } else {
      const double setup = out.record.setup_seconds;
      out.record = metrics::failed_record(record_status(sol.status));
      out.record.setup_seconds = setup;
    }
    out.record.solve_seconds = solve_seconds;
  } catch (const std::exception& e) {
    out.record = metrics::failed_record(metrics::RecordStatus::Failed);
    out.record.setup_seconds = seconds_since(t0);
    out.message = e.what();
  }
  return out;
}

// Projection containment, ordering against CH, and IsoFor depths.
void check_invariants(ExperimentResult& result, const vdom::ExtendedDataset& ext,
                      const vdom::DomainContext& context,
                      const std::vector<vdom::ValidityDomainSpec>& domains) {
  const std::string tag = result.spec.function_label() + " seed " + std::to_string(result.spec.seed);
  vdom::ValidityDomainSpec ch;
  ch.kind = vdom::DomainKind::CH;
  const DomainOutcome* ch_outcome = nullptr;
  for (const DomainOutcome& o : result.outcomes) {
    if (o.kind == vdom::DomainKind::CH && o.record.optimal()) ch_outcome = &o;
  }
  for (std::size_t k = 0; k < result.outcomes.size(); ++k) {
    const DomainOutcome& o = result.outcomes[k];
    if (!o.record.optimal()) continue;
    if (o.kind == vdom::DomainKind::CHplus) {
      const vdom::Membership in = vdom::membership_test(ch, ext, o.x_hat, Vector(), context);
      if (in.residual > 1e-6) {
        result.violations.push_back(tag + ": " + o.domain + " solution outside CH (residual " +
                                    format_double(in.residual) + ")");
      }
      if (ch_outcome != nullptr && o.v_hat < ch_outcome->v_hat - 1e-6) {
        result.violations.push_back(tag + ": " + o.domain + " optimum " + format_double(o.v_hat) +
                                    " below CH optimum " + format_double(ch_outcome->v_hat));
      }
    }
    if (o.kind == vdom::DomainKind::IsoFor && context.forest != nullptr) {
      const int d = domains[k].isofor_depth;
      for (std::size_t t = 0; t < context.forest->trees.size(); ++t) {
        const auto& tree = context.forest->trees[t];
        const int depth = tree.nodes[tree.leaf_index(o.x_hat)].depth;
        if (depth < d) {
          result.violations.push_back(tag + ": IsoFor solution reaches depth " +
                                      std::to_string(depth) + " < " + std::to_string(d) +
                                      " in tree " + std::to_string(t));
        }
      }
    }
  }
}

}  // namespace

std::string ExperimentSpec::function_label() const {
  return n1 > 0 ? function + "@" + std::to_string(n1) : function;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Problem& problem,
                                const learn::TrainedRegressor& model,
                                const learn::IsolationForestModel* forest) {
  ExperimentResult result;
  result.spec = spec;
  const vdom::ExtendedDataset ext =
      vdom::build_extended_dataset(problem.data, Matrix(), problem.data.noisy_values);
  const vdom::DomainContext context{problem.box, forest};
  std::vector<vdom::ValidityDomainSpec> domains = spec.domains;
  for (auto& d : domains) {
    if (d.kind == vdom::DomainKind::IsoFor && d.isofor_depth == 0 && forest != nullptr) {
      d.isofor_depth = forest->max_depth;
    }
    result.outcomes.push_back(solve_domain(spec, problem, model, ext, context, d));
  }
  check_invariants(result, ext, context, domains);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto t0 = Clock::now();
  ExperimentResult failed;
  failed.spec = spec;
  try {
    const bench::GroundTruth gt = bench::make_ground_truth(spec.function, spec.n1);
    const bench::SamplingRule rule = bench::make_rule(spec.sampling, gt);
    Problem problem{gt.box, bench::sample_dataset(gt, rule, spec.n, spec.sigma, spec.seed),
                    metrics::true_model(gt)};
    const learn::TrainedRegressor model =
        learn::train_regressor(spec.model, spec.model_config, problem.data, spec.seed);
    learn::IsolationForestModel forest;
    if (needs_forest(spec)) {
      learn::IsolationForestConfig cfg = spec.isofor;
      if (cfg.max_depth <= 0) cfg.max_depth = (spec.function == "Beale" || spec.function == "Peaks") ? 5 : 6;
      forest = learn::train_isolation_forest(problem.data.inputs, cfg, spec.seed);
    }
    const double train_seconds = seconds_since(t0);
    ExperimentResult result =
        run_experiment(spec, problem, model, needs_forest(spec) ? &forest : nullptr);
    result.train_seconds = train_seconds;
    return result;
  } catch (const std::exception& e) {
    for (const auto& d : spec.domains) {
      DomainOutcome o;
      o.domain = d.label();
      o.kind = d.kind;
      o.record = metrics::failed_record(metrics::RecordStatus::Failed);
      o.message = e.what();
      failed.outcomes.push_back(std::move(o));
    }
    failed.train_seconds = seconds_since(t0);
    return failed;
  }
}

std::vector<ExperimentResult> run_specs(const std::vector<ExperimentSpec>& specs, int parallelism) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::vector<ExperimentResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) results[i] = run_experiment(specs[i]);
  };
  const int threads = std::min<int>(parallelism, static_cast<int>(specs.size()));
  if (threads <= 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace clearn::runner
