#include "clearn/bench.hpp"

#include <algorithm>
#include <array>
#include <random>

namespace clearn::bench {

namespace {

struct FunctionInfo {
  Function function;
  std::string_view name;
  int default_dim;
  double lower;
  double upper;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {Function::Beale, "Beale", 2, -4.5, 4.5},
    {Function::Griewank, "Griewank", 4, -600.0, 600.0},
    {Function::Peaks, "Peaks", 2, -3.0, 3.0},
    {Function::Powell, "Powell", 4, -4.0, 5.0},
    {Function::Qing, "Qing", 4, -500.0, 500.0},
    {Function::Quintic, "Quintic", 4, -10.0, 10.0},
    {Function::Rastrigin, "Rastrigin", 10, -5.12, 5.12},
    {Function::RotatedHyperEllipsoid, "RotatedHyperEllipsoid", 20, -200.0, 200.0},
}};

const FunctionInfo& info(Function f) {
  for (const auto& fi : kFunctions) {
    if (fi.function == f) return fi;
  }
  throw ConfigError("unknown benchmark function");
}

void check_dimension(Function f, Eigen::Index n) {
  const bool ok = [&] {
    switch (f) {
      case Function::Beale:
      case Function::Peaks:
        return n == 2;
      case Function::Powell:
        return n >= 4 && n % 4 == 0;
      default:
        return n >= 1;
    }
  }();
  if (!ok) {
    throw DimensionError(std::string(function_name(f)) + " does not accept dimension " +
                         std::to_string(n));
  }
}

double evaluate_unchecked(Function f, const Eigen::Ref<const Vector>& x) {
  switch (f) {
    case Function::Beale: return beale(x);
    case Function::Griewank: return griewank(x);
    case Function::Peaks: return peaks(x);
    case Function::Powell: return powell(x);
    case Function::Qing: return qing(x);
    case Function::Quintic: return quintic(x);
    case Function::Rastrigin: return rastrigin(x);
    case Function::RotatedHyperEllipsoid: return rotated_hyper_ellipsoid(x);
  }
  return 0.0;
}

}  // namespace

Function parse_function(std::string_view name) {
  for (const auto& fi : kFunctions) {
    if (fi.name == name) return fi.function;
  }
  throw ConfigError("unknown ground truth '" + std::string(name) + "'");
}

std::string_view function_name(Function f) { return info(f).name; }

const std::vector<std::string>& supported_functions() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& fi : kFunctions) out.emplace_back(fi.name);
    return out;
  }();
  return names;
}

double GroundTruth::evaluate(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != n1) {
    throw DimensionError(name + " expects dimension " + std::to_string(n1) + ", got " +
                         std::to_string(x.size()));
  }
  return evaluate_unchecked(function, x);
}

GroundTruth make_ground_truth(std::string_view name, int n1) {
  const Function f = parse_function(name);
  const FunctionInfo& fi = info(f);
  if (n1 == 0) n1 = fi.default_dim;
  check_dimension(f, n1);

  GroundTruth gt;
  gt.name = std::string(fi.name);
  gt.function = f;
  gt.n1 = n1;
  gt.box = Box::uniform(n1, fi.lower, fi.upper);
  gt.x_star = Vector::Zero(n1);
  switch (f) {
    case Function::Beale:
      gt.x_star << 3.0, 0.5;
      break;
    case Function::Peaks:
      gt.x_star << 0.22827890803645393, -1.6255349639522092;
      break;
    case Function::Qing:
      for (int i = 0; i < n1; ++i) gt.x_star(i) = std::sqrt(static_cast<double>(i + 1));
      break;
    case Function::Quintic:
      gt.x_star.setConstant(-1.0);
      break;
    default:
      break;
  }
  gt.v_star = (f == Function::Peaks) ? evaluate_unchecked(f, gt.x_star) : 0.0;
  return gt;
}

double evaluate_ground_truth(std::string_view name, const Eigen::Ref<const Vector>& x) {
  const Function f = parse_function(name);
  check_dimension(f, x.size());
  return evaluate_unchecked(f, x);
}

double domain_diameter(const GroundTruth& gt) { return gt.box.diameter(); }

SamplingKind parse_sampling(std::string_view name) {
  if (name == "Uniform") return SamplingKind::Uniform;
  if (name == "Normal") return SamplingKind::Normal;
  throw ConfigError("unknown sampling rule '" + std::string(name) + "'");
}

std::string_view sampling_name(SamplingKind kind) {
  return kind == SamplingKind::Uniform ? "Uniform" : "Normal";
}

double normal_rho(const GroundTruth& gt) {
  const double to_lower = (gt.x_star - gt.box.lower).minCoeff();
  const double to_upper = (gt.box.upper - gt.x_star).minCoeff();
  return std::min(to_lower, to_upper) / 6.0;
}

SamplingRule make_rule(SamplingKind kind, const GroundTruth& gt) {
  SamplingRule rule;
  rule.kind = kind;
  if (kind == SamplingKind::Normal) rule.rho = normal_rho(gt);
  return rule;
}

double stddev(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().mean());
}

Dataset sample_dataset(const GroundTruth& gt, const SamplingRule& rule, int n, double sigma,
                       std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample size must be at least 1");
  if (!(sigma >= 0.0)) throw ArgumentError("noise scale must be nonnegative");
  if ((gt.box.width().array() <= 0.0).any()) {
    throw ConfigError("degenerate box for " + gt.name);
  }
  if (rule.kind == SamplingKind::Normal && !(rule.rho > 0.0)) {
    throw ConfigError("Normal sampling requires rho > 0");
  }

  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.sigma = sigma;
  ds.seed = seed;
  ds.inputs.resize(n, gt.n1);

  if (rule.kind == SamplingKind::Uniform) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < gt.n1; ++j) {
        std::uniform_real_distribution<double> u(gt.box.lower(j), gt.box.upper(j));
        ds.inputs(i, j) = u(rng);
      }
    }
  } else {
    std::normal_distribution<double> z(0.0, 1.0);
    Vector point(gt.n1);
    for (int i = 0; i < n; ++i) {
      do {
        for (int j = 0; j < gt.n1; ++j) point(j) = gt.x_star(j) + rule.rho * z(rng);
      } while (!gt.box.contains(point));
      ds.inputs.row(i) = point.transpose();
    }
  }

  ds.clean_values.resize(n);
  for (int i = 0; i < n; ++i) ds.clean_values(i) = gt.evaluate(ds.inputs.row(i).transpose());

  ds.noisy_values = ds.clean_values;
  if (sigma > 0.0) {
    const double scale = sigma * stddev(ds.clean_values);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < n; ++i) ds.noisy_values(i) += scale * noise(rng);
  }
  return ds;
}

}  // namespace clearn::bench
