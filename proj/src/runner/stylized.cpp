#include "clearn/runner.hpp"

#include "clearn/embed.hpp"
#include "clearn/milp/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
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

Vector unit_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  do {
    for (int j = 0; j < n; ++j) v(j) = z(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// ---------------------------------------------------------------- norm model

std::vector<vdom::ValidityDomainSpec> default_norm_domains() {
  std::vector<vdom::ValidityDomainSpec> d{make_domain(vdom::DomainKind::Box),
                                          make_domain(vdom::DomainKind::CH),
                                          make_domain(vdom::DomainKind::CHplus),
                                          make_domain(vdom::DomainKind::CHplusEps, 0.05),
                                          make_domain(vdom::DomainKind::CHplusEps, 0.10)};
  for (auto& s : d) {
    if (s.extended()) s.output_subset = {0};
  }
  return d;
}

DomainOutcome solve_norm_domain(const StylizedNormConfig& config, const Vector& c,
                                const learn::TrainedRegressor& model, const vdom::ExtendedDataset& ext,
                                const vdom::DomainContext& context, const metrics::TrueModel& truth,
                                const vdom::ValidityDomainSpec& domain) {
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
    m.add_constraint(milp::LinearExpr::variable(emb.output), milp::RowSense::LessEqual, 1.0, "theta");
    milp::LinearExpr objective;
    for (int j = 0; j < box.dim(); ++j) objective.add(x[j], c(j));
    const std::vector<int> y{emb.output};
    vdom::attach_domain(domain, ext, m, x, y, &objective, context);
    m.set_objective(objective, milp::ObjectiveSense::Minimize);
    const double setup = seconds_since(t0);

    const auto t1 = Clock::now();
    const milp::Solution sol = milp::solve(m, config.solver);
    out.nodes = sol.nodes;
    if (sol.status == milp::SolveStatus::Optimal) {
      out.x_hat.resize(box.dim());
      for (int j = 0; j < box.dim(); ++j) out.x_hat(j) = sol.values(x[j]);
      out.v_hat = sol.objective;
      const Vector y_hat = Vector::Constant(1, model.predict(out.x_hat));
      out.record = metrics::compute_errors(out.x_hat, y_hat, out.v_hat, truth);
    } else {
      out.record = metrics::failed_record(record_status(sol.status));
    }
    out.record.setup_seconds = setup;
    out.record.solve_seconds = seconds_since(t1);
  } catch (const std::exception& e) {
    out.record = metrics::failed_record(metrics::RecordStatus::Failed);
    out.record.setup_seconds = seconds_since(t0);
    out.message = e.what();
  }
  return out;
}

// ---------------------------------------------------------------- price model

// Full bivariate quadratic basis 1, p1, p2, p1^2, p1 p2, p2^2.
Eigen::Matrix<double, 6, 1> quadratic_basis(double p1, double p2) {
  Eigen::Matrix<double, 6, 1> b;
  b << 1.0, p1, p2, p1 * p1, p1 * p2, p2 * p2;
  return b;
}

struct QuadraticFit {
  Eigen::Matrix<double, 6, 2> coef;

  Vector predict(double p1, double p2) const {
    return (quadratic_basis(p1, p2).transpose() * coef).transpose();
  }
};

QuadraticFit fit_quadratic(const Matrix& prices, const Matrix& demand) {
  Matrix a(prices.rows(), 6);
  for (Eigen::Index i = 0; i < prices.rows(); ++i) {
    a.row(i) = quadratic_basis(prices(i, 0), prices(i, 1)).transpose();
  }
  QuadraticFit fit;
  fit.coef = a.colPivHouseholderQr().solve(demand);
  return fit;
}

struct GridPoint {
  Vector p;
  Vector d_hat;
  double revenue = 0.0;
};

// Price-feasible grid points sorted by predicted revenue, best first. Ties
// keep grid order.
std::vector<GridPoint> ranked_grid(const PriceModel& model, const QuadraticFit& fit) {
  const Box box = model.box();
  const int n1 = static_cast<int>(std::lround((box.upper(0) - box.lower(0)) / model.step));
  const int n2 = static_cast<int>(std::lround((box.upper(1) - box.lower(1)) / model.step));
  std::vector<GridPoint> grid;
  for (int i = 0; i <= n1; ++i) {
    for (int j = 0; j <= n2; ++j) {
      Vector p(2);
      p << box.lower(0) + i * model.step, box.lower(1) + j * model.step;
      if (!model.price_feasible(p)) continue;
      Vector d = fit.predict(p(0), p(1));
      if (d.sum() > model.cap) continue;
      const double revenue = p.dot(d);
      grid.push_back({std::move(p), std::move(d), revenue});
    }
  }
  std::stable_sort(grid.begin(), grid.end(),
                   [](const GridPoint& a, const GridPoint& b) { return a.revenue > b.revenue; });
  return grid;
}

DomainOutcome solve_price_domain(const std::vector<GridPoint>& grid, const vdom::ExtendedDataset& ext,
                                 const vdom::DomainContext& context, const metrics::TrueModel& truth,
                                 const vdom::ValidityDomainSpec& domain) {
  DomainOutcome out;
  out.domain = domain.label();
  out.kind = domain.kind;
  const auto t0 = Clock::now();
  try {
    if (domain.append_objective) throw ConfigError("the price model has no objective column");
    vdom::HullScreen screen(domain, ext, context);
    const double setup = seconds_since(t0);
    const auto t1 = Clock::now();
    const GridPoint* best = nullptr;
    for (const GridPoint& g : grid) {
      Vector tuple(domain.extended() ? static_cast<Eigen::Index>(domain.output_subset.size()) : 0);
      for (Eigen::Index k = 0; k < tuple.size(); ++k) tuple(k) = g.d_hat(domain.output_subset[k]);
      if (screen.excludes(g.p, tuple)) continue;
      ++out.nodes;
      const vdom::Membership in = vdom::membership_test(domain, ext, g.p, tuple, context);
      if (in.inside) {
        best = &g;
        break;
      }
      if (in.separator.size() > 0) screen.add_direction(in.separator);
    }
    if (best == nullptr) {
      out.record = metrics::failed_record(metrics::RecordStatus::Infeasible);
    } else {
      out.x_hat = best->p;
      out.v_hat = best->revenue;
      out.record = metrics::compute_errors(best->p, best->d_hat, best->revenue, truth);
    }
    out.record.setup_seconds = setup;
    out.record.solve_seconds = seconds_since(t1);
  } catch (const std::exception& e) {
    out.record = metrics::failed_record(metrics::RecordStatus::Failed);
    out.record.setup_seconds = seconds_since(t0);
    out.message = e.what();
  }
  return out;
}

template <class F>
void parallel_for(std::size_t count, int parallelism, F&& body) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  const int threads = std::min<int>(parallelism, static_cast<int>(count));
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

StylizedResult run_stylized_norm(const StylizedNormConfig& config) {
  if (config.n1 < 1 || config.n < 1) throw ArgumentError("norm model needs n1 >= 1 and N >= 1");
  const std::vector<vdom::ValidityDomainSpec> domains =
      config.domains.empty() ? default_norm_domains() : config.domains;
  StylizedResult out;
  for (std::uint64_t seed : config.seeds) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(seed);
    const Vector c = unit_direction(config.n1, rng);
    std::uniform_real_distribution<double> radius(0.5, 1.5);
    std::normal_distribution<double> noise(0.0, 1.0);
    bench::Dataset data;
    data.inputs.resize(config.n, config.n1);
    data.clean_values.resize(config.n);
    data.noisy_values.resize(config.n);
    data.sigma = config.noise;
    data.seed = seed;
    for (int i = 0; i < config.n; ++i) {
      data.inputs.row(i) = (radius(rng) * unit_direction(config.n1, rng)).transpose();
    }
    for (int i = 0; i < config.n; ++i) {
      data.clean_values(i) = data.inputs.row(i).norm();
      data.noisy_values(i) = data.clean_values(i) + config.noise * noise(rng);
    }
    const learn::TrainedRegressor model =
        learn::train_regressor(learn::ModelKind::Mlp, config.model_config, data, seed);

    Matrix outputs = data.noisy_values;
    const Vector phi = data.inputs * c;
    const vdom::ExtendedDataset ext = vdom::build_extended_dataset(
        data, outputs, phi, [](const Vector&, const Vector& y) { return y(0) <= 1.0; });
    out.feasible_counts.push_back(ext.feasible_count());

    metrics::TrueModel truth;
    truth.h = [](const Vector& x) { return Vector::Constant(1, x.norm()); };
    truth.x_star = -c;
    truth.v_star = -1.0;
    truth.theta = [](const Vector& y) { return Vector(y.array() - 1.0); };

    ExperimentResult result;
    result.spec.function = "norm";
    result.spec.n1 = config.n1;
    result.spec.n = config.n;
    result.spec.sigma = config.noise;
    result.spec.seed = seed;
    result.spec.model = learn::ModelKind::Mlp;
    result.spec.model_config = config.model_config;
    result.spec.domains = domains;
    result.spec.solver = config.solver;
    result.train_seconds = seconds_since(t0);
    const vdom::DomainContext context{Box::uniform(config.n1, -1.5, 1.5), nullptr};
    for (const auto& d : domains) {
      result.outcomes.push_back(solve_norm_domain(config, c, model, ext, context, truth, d));
    }
    out.experiments.push_back(std::move(result));
  }
  return out;
}

Vector PriceModel::demand(const Eigen::Ref<const Vector>& p) const {
  if (p.size() != 2) throw DimensionError("prices must have two entries");
  Vector d(2);
  d << 1e7 * std::pow(p(0), -3.2) * std::pow(p(1), 0.5), 1e7 * std::pow(p(0), 1.5) * std::pow(p(1), -2.2);
  return d;
}

bool PriceModel::price_feasible(const Eigen::Ref<const Vector>& p) const {
  constexpr double tol = 1e-9;
  const Box b = box();
  for (int j = 0; j < 2; ++j) {
    if (p(j) < b.lower(j) - tol || p(j) > b.upper(j) + tol) return false;
  }
  return p(1) >= p(0) + 0.5 - tol && p(1) <= p(0) + 1.5 + tol;
}

Box PriceModel::box() const {
  Vector lo(2), hi(2);
  lo << 6.5, 7.5;
  hi << 9.5, 10.5;
  return {lo, hi};
}

GridOptimum price_oracle(const PriceModel& model) {
  const Box box = model.box();
  const int n1 = static_cast<int>(std::lround((box.upper(0) - box.lower(0)) / model.step));
  const int n2 = static_cast<int>(std::lround((box.upper(1) - box.lower(1)) / model.step));
  GridOptimum best;
  Vector p(2);
  for (int i = 0; i <= n1; ++i) {
    for (int j = 0; j <= n2; ++j) {
      p << box.lower(0) + i * model.step, box.lower(1) + j * model.step;
      if (!model.price_feasible(p)) continue;
      const Vector d = model.demand(p);
      if (d.sum() > model.cap) continue;
      const double revenue = p.dot(d);
      if (!best.found || revenue > best.revenue) {
        best.p = p;
        best.revenue = revenue;
        best.found = true;
      }
    }
  }
  return best;
}

StylizedResult run_stylized_price(const StylizedPriceConfig& config) {
  if (config.n < 6) throw ArgumentError("the quadratic fit needs at least 6 samples");
  std::vector<vdom::ValidityDomainSpec> domains = config.domains;
  if (domains.empty()) {
    vdom::ValidityDomainSpec plus = make_domain(vdom::DomainKind::CHplus);
    plus.output_subset = {0, 1};
    plus.data_subset = vdom::DataSubset::All;
    plus.append_objective = false;
    domains = {make_domain(vdom::DomainKind::Box), make_domain(vdom::DomainKind::CH), plus};
  }
  const PriceModel& pm = config.model;
  const GridOptimum oracle = price_oracle(pm);
  if (!oracle.found) throw DomainError("the price model has no feasible grid point");

  metrics::TrueModel truth;
  truth.h = [pm](const Vector& p) { return pm.demand(p); };
  truth.x_star = oracle.p;
  truth.v_star = oracle.revenue;
  truth.theta = [cap = pm.cap](const Vector& d) { return Vector::Constant(1, d.sum() - cap); };

  StylizedResult out;
  out.experiments.resize(config.seeds.size());
  parallel_for(config.seeds.size(), config.parallelism, [&](std::size_t s) {
    const std::uint64_t seed = config.seeds[s];
    const auto t0 = Clock::now();
    const Box box = pm.box();
    std::mt19937_64 rng(seed);
    bench::Dataset data;
    data.inputs.resize(config.n, 2);
    data.seed = seed;
    Matrix demand(config.n, 2);
    for (int i = 0; i < config.n; ++i) {
      for (int j = 0; j < 2; ++j) {
        std::uniform_real_distribution<double> u(box.lower(j), box.upper(j));
        data.inputs(i, j) = u(rng);
      }
    }
    for (int i = 0; i < config.n; ++i) demand.row(i) = pm.demand(data.inputs.row(i).transpose()).transpose();
    data.clean_values = (data.inputs.array() * demand.array()).rowwise().sum();
    data.noisy_values = data.clean_values;
    const QuadraticFit fit = fit_quadratic(data.inputs, demand);
    const vdom::ExtendedDataset ext =
        vdom::build_extended_dataset(data, demand, data.clean_values, [&pm](const Vector& p, const Vector& d) {
          return pm.price_feasible(p) && d.sum() <= pm.cap;
        });
    const std::vector<GridPoint> grid = ranked_grid(pm, fit);

    ExperimentResult& result = out.experiments[s];
    result.spec.function = "price";
    result.spec.n1 = 2;
    result.spec.n = config.n;
    result.spec.seed = seed;
    result.spec.model = learn::ModelKind::Linear;
    result.spec.domains = domains;
    result.train_seconds = seconds_since(t0);
    const vdom::DomainContext context{box, nullptr};
    for (const auto& d : domains) result.outcomes.push_back(solve_price_domain(grid, ext, context, truth, d));
  });
  return out;
}

}  // namespace clearn::runner
