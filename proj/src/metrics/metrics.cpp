#include "clearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace clearn::metrics {

std::string_view status_name(RecordStatus status) {
  switch (status) {
    case RecordStatus::Optimal: return "Optimal";
    case RecordStatus::Infeasible: return "Infeasible";
    case RecordStatus::Unbounded: return "Unbounded";
    case RecordStatus::LimitReached: return "LimitReached";
    case RecordStatus::Failed: return "Failed";
  }
  return "Failed";
}

RecordStatus parse_status(std::string_view name) {
  for (RecordStatus s : {RecordStatus::Optimal, RecordStatus::Infeasible, RecordStatus::Unbounded,
                         RecordStatus::LimitReached, RecordStatus::Failed}) {
    if (status_name(s) == name) return s;
  }
  throw ParseError("unknown status '" + std::string(name) + "'");
}

std::string_view error_name(ErrorType type) {
  switch (type) {
    case ErrorType::FunctionValue: return "function_value_error";
    case ErrorType::OptimalValue: return "optimal_value_error";
    case ErrorType::OptimalSolution: return "optimal_solution_error";
    case ErrorType::Feasibility: return "feasibility_error";
  }
  return "?";
}

std::optional<double> ErrorRecord::error(ErrorType type) const {
  switch (type) {
    case ErrorType::FunctionValue: return function_value;
    case ErrorType::OptimalValue: return optimal_value;
    case ErrorType::OptimalSolution: return optimal_solution;
    case ErrorType::Feasibility: return feasibility;
  }
  return std::nullopt;
}

TrueModel true_model(const bench::GroundTruth& gt) {
  TrueModel t;
  t.h = [gt](const Vector& x) { return Vector::Constant(1, gt.evaluate(x)); };
  t.x_star = gt.x_star;
  t.v_star = gt.v_star;
  return t;
}

ErrorRecord compute_errors(const Eigen::Ref<const Vector>& x_hat, const Eigen::Ref<const Vector>& y_hat,
                           double v_hat, const TrueModel& truth) {
  if (x_hat.size() != truth.x_star.size()) throw DimensionError("x_hat does not match x*");
  const Vector h = truth.h(x_hat);
  if (h.size() != y_hat.size()) throw DimensionError("y_hat does not match h(x_hat)");
  ErrorRecord r;
  r.status = RecordStatus::Optimal;
  r.function_value = (y_hat - h).norm();
  r.optimal_value = std::abs(v_hat - truth.v_star);
  r.optimal_solution = (x_hat - truth.x_star).norm();
  if (truth.theta) r.feasibility = truth.theta(h).cwiseMax(0.0).norm();
  return r;
}

ErrorRecord failed_record(RecordStatus status) {
  ErrorRecord r;
  r.status = status;
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

const Cell& AggregateTable::at(std::string_view group, std::string_view domain) const {
  const auto g = std::find(groups.begin(), groups.end(), group);
  const auto d = std::find(domains.begin(), domains.end(), domain);
  if (g == groups.end() || d == domains.end()) {
    throw ArgumentError("no cell for " + std::string(group) + " / " + std::string(domain));
  }
  return cells[g - groups.begin()][d - domains.begin()];
}

AggregateTable aggregate(const std::vector<LabeledRecord>& records, ErrorType error,
                         Statistic statistic, std::string_view reference,
                         bool require_reference) {
  AggregateTable table;
  table.error = error;
  table.statistic = statistic;
  auto index_of = [](std::vector<std::string>& list, const std::string& key) {
    const auto it = std::find(list.begin(), list.end(), key);
    if (it != list.end()) return static_cast<int>(it - list.begin());
    list.push_back(key);
    return static_cast<int>(list.size()) - 1;
  };
  // values[group][instance][domain]
  std::vector<std::map<std::string, std::map<int, std::optional<double>>>> values;
  std::vector<std::set<int>> group_domains;
  for (const LabeledRecord& r : records) {
    const int g = index_of(table.groups, r.group);
    const int d = index_of(table.domains, r.domain);
    if (static_cast<int>(values.size()) <= g) {
      values.resize(g + 1);
      group_domains.resize(g + 1);
    }
    values[g][r.instance][d] = r.record.optimal() ? r.record.error(error) : std::nullopt;
    group_domains[g].insert(d);
  }
  const auto ref = std::find(table.domains.begin(), table.domains.end(), reference);
  const int ref_index = ref == table.domains.end() ? -1 : static_cast<int>(ref - table.domains.begin());

  const int nd = static_cast<int>(table.domains.size());
  table.cells.assign(table.groups.size(), std::vector<Cell>(nd));
  table.instances.assign(table.groups.size(), 0);
  table.dropped.assign(table.groups.size(), 0);
  for (std::size_t g = 0; g < table.groups.size(); ++g) {
    if (ref_index < 0 || !group_domains[g].count(ref_index)) {
      if (!require_reference) continue;
      throw ArgumentError("group '" + table.groups[g] + "' has no " + std::string(reference) +
                          " records");
    }
    std::vector<std::vector<double>> kept(nd);
    for (const auto& [instance, by_domain] : values[g]) {
      bool complete = by_domain.size() == group_domains[g].size();
      for (const auto& [d, v] : by_domain) complete = complete && v.has_value();
      if (!complete) {
        ++table.dropped[g];
        continue;
      }
      ++table.instances[g];
      for (const auto& [d, v] : by_domain) kept[d].push_back(*v);
    }
    auto stat = [&](const std::vector<double>& v) {
      return statistic == Statistic::Median ? median(v) : mean(v);
    };
    if (kept[ref_index].empty()) continue;
    const double base = stat(kept[ref_index]);
    double best = std::numeric_limits<double>::infinity();
    for (int d : group_domains[g]) {
      Cell& c = table.cells[g][d];
      c.raw = stat(kept[d]);
      if (base > 0.0) {
        c.defined = true;
        c.value = d == ref_index ? 1.0 : c.raw / base;
        best = std::min(best, c.value);
      }
    }
    for (int d : group_domains[g]) {
      Cell& c = table.cells[g][d];
      c.minimum = c.defined && c.value <= best * (1.0 + 1e-12);
    }
  }
  return table;
}

std::string to_markdown(const AggregateTable& table) {
  std::string out = "| Domain |";
  std::string rule = "|---|";
  for (const std::string& g : table.groups) {
    out += " " + g + " |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  char buf[64];
  for (std::size_t d = 0; d < table.domains.size(); ++d) {
    out += "| " + table.domains[d] + " |";
    for (std::size_t g = 0; g < table.groups.size(); ++g) {
      const Cell& c = table.cells[g][d];
      if (!c.defined) {
        out += " n/a |";
        continue;
      }
      std::snprintf(buf, sizeof buf, c.minimum ? " **%.2f** |" : " %.2f |", c.value);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

namespace {

struct Moments {
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments central_moments(const std::vector<double>& values) {
  const double mu = mean(values);
  Moments m;
  for (double v : values) {
    const double d = v - mu;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double n = static_cast<double>(values.size());
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace

double skewness(const std::vector<double>& values) {
  const Moments m = central_moments(values);
  if (m.m2 <= 0.0) return 0.0;
  return m.m3 / std::pow(m.m2, 1.5);
}

double kurtosis(const std::vector<double>& values) {
  const Moments m = central_moments(values);
  if (m.m2 <= 0.0) return 0.0;
  return m.m4 / (m.m2 * m.m2);
}

RatioStats ratio_distribution_stats(const std::vector<double>& numerator,
                                    const std::vector<double>& denominator, int bins) {
  if (numerator.size() != denominator.size()) throw ArgumentError("ratio inputs differ in length");
  if (bins < 1) throw ArgumentError("histogram needs at least one bin");
  RatioStats s;
  std::vector<double> logs;
  int below = 0;
  for (std::size_t i = 0; i < numerator.size(); ++i) {
    if (denominator[i] == 0.0) {
      ++s.zero_denominators;
      continue;
    }
    const double r = numerator[i] / denominator[i];
    ++s.count;
    if (r < 1.0) ++below;
    if (r > 0.0) {
      logs.push_back(std::log10(r));
    } else {
      ++s.zero_numerators;
    }
  }
  if (s.count == 0) throw DataError("every denominator is zero");
  s.fraction_below_one = static_cast<double>(below) / s.count;
  if (logs.empty()) return s;
  s.skewness = skewness(logs);
  s.kurtosis = kurtosis(logs);
  double lo = *std::min_element(logs.begin(), logs.end());
  double hi = *std::max_element(logs.begin(), logs.end());
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  s.log10_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) s.log10_edges[b] = lo + (hi - lo) * b / bins;
  s.histogram.assign(bins, 0);
  for (double v : logs) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    ++s.histogram[std::clamp(b, 0, bins - 1)];
  }
  return s;
}

}  // namespace clearn::metrics
