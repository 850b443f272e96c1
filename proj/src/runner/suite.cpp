#include "clearn/runner.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef CLEARN_VERSION
#define CLEARN_VERSION "0.0.0"
#endif

namespace clearn::runner {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = get_as<T>(obj.at(key), key);
}

template <class T, class F>
std::vector<T> read_list(const json& obj, const char* key, F&& parse) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("key '" + std::string(key) + "' must be a list");
  std::vector<T> out;
  for (const json& item : v) out.push_back(parse(item));
  return out;
}

std::string as_string(const json& v, const std::string& key) { return get_as<std::string>(v, key); }

vdom::ValidityDomainSpec parse_domain(const json& d) {
  if (d.is_string()) return make_domain(vdom::parse_domain_kind(d.get<std::string>()));
  check_keys(d, "domain", {"kind", "epsilon", "norm", "outputs", "data", "append_objective", "depth"});
  if (!d.contains("kind")) throw ConfigError("domain needs a 'kind'");
  vdom::ValidityDomainSpec s =
      make_domain(vdom::parse_domain_kind(as_string(d.at("kind"), "kind")), 0.0);
  read_opt(d, "epsilon", s.epsilon);
  if (d.contains("norm")) s.norm = vdom::parse_norm(as_string(d.at("norm"), "norm"));
  read_opt(d, "outputs", s.output_subset);
  if (d.contains("data")) {
    const std::string data = as_string(d.at("data"), "data");
    if (data == "feasible") {
      s.data_subset = vdom::DataSubset::FeasibleOnly;
    } else if (data == "all") {
      s.data_subset = vdom::DataSubset::All;
    } else {
      throw ConfigError("domain data must be 'feasible' or 'all', got '" + data + "'");
    }
  }
  read_opt(d, "append_objective", s.append_objective);
  read_opt(d, "depth", s.isofor_depth);
  return s;
}

json domain_to_json(const vdom::ValidityDomainSpec& s) {
  json d{{"kind", std::string(vdom::domain_kind_name(s.kind))}};
  if (s.enlarged()) {
    d["epsilon"] = s.epsilon;
    d["norm"] = std::string(vdom::norm_name(s.norm));
  }
  if (s.extended()) {
    d["outputs"] = s.output_subset;
    d["data"] = s.subset() == vdom::DataSubset::All ? "all" : "feasible";
    d["append_objective"] = s.append_objective;
  }
  if (s.kind == vdom::DomainKind::IsoFor) d["depth"] = s.isofor_depth;
  return d;
}

void parse_model_config(const json& m, learn::RegressorConfig& c) {
  check_keys(m, "model", {"trees", "max_depth", "max_features", "bootstrap", "learning_rate", "hidden",
                          "epochs", "batch_size", "step_size"});
  read_opt(m, "trees", c.trees);
  read_opt(m, "max_depth", c.max_depth);
  read_opt(m, "max_features", c.max_features);
  read_opt(m, "bootstrap", c.bootstrap);
  read_opt(m, "learning_rate", c.learning_rate);
  read_opt(m, "hidden", c.hidden);
  read_opt(m, "epochs", c.epochs);
  read_opt(m, "batch_size", c.batch_size);
  read_opt(m, "step_size", c.step_size);
}

json model_config_to_json(const learn::RegressorConfig& c) {
  return {{"trees", c.trees},         {"max_depth", c.max_depth},   {"max_features", c.max_features},
          {"bootstrap", c.bootstrap}, {"learning_rate", c.learning_rate}, {"hidden", c.hidden},
          {"epochs", c.epochs},       {"batch_size", c.batch_size}, {"step_size", c.step_size}};
}

void parse_solver_config(const json& s, milp::SolverConfig& c) {
  check_keys(s, "solver", {"feasibility_tol", "integrality_tol", "relative_gap", "absolute_gap",
                           "node_limit", "time_limit", "ball_tol", "ball_iteration_cap"});
  read_opt(s, "feasibility_tol", c.feasibility_tol);
  read_opt(s, "integrality_tol", c.integrality_tol);
  read_opt(s, "relative_gap", c.relative_gap);
  read_opt(s, "absolute_gap", c.absolute_gap);
  read_opt(s, "node_limit", c.node_limit);
  read_opt(s, "time_limit", c.time_limit);
  read_opt(s, "ball_tol", c.ball_tol);
  read_opt(s, "ball_iteration_cap", c.ball_iteration_cap);
}

json solver_config_to_json(const milp::SolverConfig& c) {
  json j{{"feasibility_tol", c.feasibility_tol},
         {"integrality_tol", c.integrality_tol},
         {"relative_gap", c.relative_gap},
         {"absolute_gap", c.absolute_gap},
         {"node_limit", c.node_limit},
         {"ball_tol", c.ball_tol},
         {"ball_iteration_cap", c.ball_iteration_cap}};
  if (std::isfinite(c.time_limit)) j["time_limit"] = c.time_limit;
  return j;
}

json config_to_json(const RunConfig& c) {
  json functions = json::array();
  for (const auto& f : c.functions) functions.push_back({{"name", f.name}, {"n1", f.n1}});
  json samplings = json::array();
  for (auto s : c.samplings) samplings.push_back(std::string(bench::sampling_name(s)));
  json models = json::array();
  for (auto m : c.models) models.push_back(std::string(learn::model_kind_name(m)));
  json domains = json::array();
  for (const auto& d : c.domains) domains.push_back(domain_to_json(d));
  return {{"functions", functions},
          {"sampling", samplings},
          {"n", c.sizes},
          {"sigma", c.sigmas},
          {"seeds", c.seeds},
          {"models", models},
          {"domains", domains},
          {"model", model_config_to_json(c.model_config)},
          {"isofor",
           {{"trees", c.isofor.trees}, {"max_depth", c.isofor.max_depth}, {"subsample", c.isofor.subsample}}},
          {"solver", solver_config_to_json(c.solver)},
          {"parallel", c.parallelism},
          {"record_timings", c.record_timings}};
}

// ---------------------------------------------------------------- CSV

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string row_error(int row, const std::string& column, const std::string& text) {
  return "row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + text + "'";
}

double parse_double(const std::string& text, int row, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(row_error(row, column, text));
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& text, int row, const std::string& column) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(row_error(row, column, text));
  }
  return v;
}

std::optional<double> parse_optional(const std::string& text, int row, const std::string& column) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, row, column);
}

std::vector<CsvRow> rows_of(const ExperimentResult& result, bool record_timings) {
  std::vector<CsvRow> rows;
  for (const DomainOutcome& o : result.outcomes) {
    CsvRow r;
    r.function = result.spec.function_label();
    r.sampling = std::string(bench::sampling_name(result.spec.sampling));
    r.n = result.spec.n;
    r.sigma = result.spec.sigma;
    r.seed = result.spec.seed;
    r.model = std::string(learn::model_kind_name(result.spec.model));
    r.domain = o.domain;
    r.record = o.record;
    if (!record_timings) {
      r.record.setup_seconds = 0.0;
      r.record.solve_seconds = 0.0;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string group_of(const CsvRow& r) { return r.function + "/" + r.sampling; }

std::string instance_of(const CsvRow& r) {
  return "N=" + std::to_string(r.n) + " sigma=" + fmt_short(r.sigma) + " " + r.model +
         " s=" + std::to_string(r.seed);
}

std::vector<metrics::LabeledRecord> label_rows(const std::vector<CsvRow>& rows) {
  std::vector<metrics::LabeledRecord> out;
  out.reserve(rows.size());
  for (const CsvRow& r : rows) out.push_back({group_of(r), r.domain, instance_of(r), r.record});
  return out;
}

// ---------------------------------------------------------------- report

constexpr const char* kPlus = "CHplus";
constexpr const char* kHull = "CH";

void ratio_section(const std::vector<CsvRow>& rows, Report& report) {
  // pairs[group][instance] = {CHplus error, CH error}
  std::map<std::string, std::map<std::string, std::pair<std::optional<double>, std::optional<double>>>> pairs;
  std::vector<std::string> order;
  for (const CsvRow& r : rows) {
    if (r.domain != kPlus && r.domain != kHull) continue;
    const std::string g = group_of(r);
    if (!pairs.count(g)) order.push_back(g);
    auto& p = pairs[g][instance_of(r)];
    const std::optional<double> e = r.record.optimal() ? r.record.function_value : std::nullopt;
    (r.domain == kPlus ? p.first : p.second) = e;
  }
  if (order.empty()) return;

  std::string md = "## CHplus / CH function value error ratio\n\n";
  md += "| Group | Pairs | Zero CH errors | Fraction below 1 | Skewness (log10) | Kurtosis (log10) |\n";
  md += "|---|---|---|---|---|---|\n";
  std::string csv = "group,bin,log10_lower,log10_upper,count\n";
  bool any = false;
  char buf[160];
  for (const std::string& g : order) {
    std::vector<double> num, den;
    for (const auto& [instance, p] : pairs[g]) {
      if (p.first && p.second) {
        num.push_back(*p.first);
        den.push_back(*p.second);
      }
    }
    if (num.empty()) continue;
    metrics::RatioStats s;
    try {
      s = metrics::ratio_distribution_stats(num, den);
    } catch (const DataError&) {
      md += "| " + g + " | " + std::to_string(num.size()) + " | " + std::to_string(num.size()) +
            " | n/a | n/a | n/a |\n";
      continue;
    }
    any = true;
    std::snprintf(buf, sizeof buf, "| %s | %d | %d | %.2f | %.3f | %.3f |\n", g.c_str(), s.count,
                  s.zero_denominators, s.fraction_below_one, s.skewness, s.kurtosis);
    md += buf;
    for (std::size_t b = 0; b < s.histogram.size(); ++b) {
      csv += g + "," + std::to_string(b) + "," + fmt_double(s.log10_edges[b]) + "," +
             fmt_double(s.log10_edges[b + 1]) + "," + std::to_string(s.histogram[b]) + "\n";
    }
  }
  report.markdown += md + "\n";
  if (any) report.ratio_csv = csv;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

std::vector<std::uint64_t> RunConfig::default_seeds(int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(2023 + static_cast<std::uint64_t>(i));
  return seeds;
}

void RunConfig::validate() const {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (functions.empty() || samplings.empty() || sizes.empty() || sigmas.empty() || seeds.empty() ||
      models.empty()) {
    throw ConfigError("every grid list needs at least one entry");
  }
  if (domains.empty()) throw ConfigError("no validity domains configured");
  for (const auto& f : functions) bench::make_ground_truth(f.name, f.n1);
  for (int n : sizes) {
    if (n <= 0) throw ConfigError("sample sizes must be positive");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ConfigError("noise levels must be nonnegative");
  }
  std::set<std::string> labels;
  for (const auto& d : domains) {
    d.validate(0);
    if (!labels.insert(d.label()).second) throw ConfigError("duplicate domain " + d.label());
  }
  solver.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  check_keys(root, "config", {"functions", "sampling", "n", "sigma", "seeds", "models", "domains", "model",
                              "isofor", "solver", "parallel", "output_dir", "record_timings"});
  RunConfig c;
  if (root.contains("functions")) {
    c.functions = read_list<RunConfig::FunctionEntry>(root, "functions", [](const json& f) {
      if (f.is_string()) return RunConfig::FunctionEntry{f.get<std::string>(), 0};
      check_keys(f, "function", {"name", "n1"});
      RunConfig::FunctionEntry e;
      e.name = as_string(f.at("name"), "name");
      read_opt(f, "n1", e.n1);
      return e;
    });
  }
  if (root.contains("sampling")) {
    c.samplings = read_list<bench::SamplingKind>(
        root, "sampling", [](const json& s) { return bench::parse_sampling(as_string(s, "sampling")); });
  }
  if (root.contains("n")) {
    c.sizes = read_list<int>(root, "n", [](const json& v) { return get_as<int>(v, "n"); });
  }
  if (root.contains("sigma")) {
    c.sigmas = read_list<double>(root, "sigma", [](const json& v) { return get_as<double>(v, "sigma"); });
  }
  if (root.contains("seeds")) {
    const json& s = root.at("seeds");
    if (s.is_object()) {
      check_keys(s, "seeds", {"first", "count"});
      std::uint64_t first = 2023;
      int count = 20;
      read_opt(s, "first", first);
      read_opt(s, "count", count);
      if (count < 1) throw ConfigError("seed count must be positive");
      c.seeds.clear();
      for (int i = 0; i < count; ++i) c.seeds.push_back(first + static_cast<std::uint64_t>(i));
    } else {
      c.seeds = read_list<std::uint64_t>(root, "seeds",
                                         [](const json& v) { return get_as<std::uint64_t>(v, "seeds"); });
    }
  }
  if (root.contains("models")) {
    c.models = read_list<learn::ModelKind>(
        root, "models", [](const json& m) { return learn::parse_model_kind(as_string(m, "models")); });
  }
  if (root.contains("domains")) {
    c.domains = read_list<vdom::ValidityDomainSpec>(root, "domains", parse_domain);
  } else {
    c.domains = default_benchmark_domains();
  }
  if (root.contains("model")) parse_model_config(root.at("model"), c.model_config);
  if (root.contains("isofor")) {
    const json& f = root.at("isofor");
    check_keys(f, "isofor", {"trees", "max_depth", "subsample"});
    read_opt(f, "trees", c.isofor.trees);
    read_opt(f, "max_depth", c.isofor.max_depth);
    read_opt(f, "subsample", c.isofor.subsample);
  }
  if (root.contains("solver")) parse_solver_config(root.at("solver"), c.solver);
  read_opt(root, "parallel", c.parallelism);
  if (root.contains("output_dir")) c.output_dir = as_string(root.at("output_dir"), "output_dir");
  read_opt(root, "record_timings", c.record_timings);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::vector<ExperimentSpec> expand_grid(const RunConfig& config) {
  std::vector<ExperimentSpec> specs;
  for (const auto& f : config.functions) {
    for (auto sampling : config.samplings) {
      for (int n : config.sizes) {
        for (double sigma : config.sigmas) {
          for (auto model : config.models) {
            for (auto seed : config.seeds) {
              ExperimentSpec s;
              s.function = f.name;
              s.n1 = f.n1;
              s.sampling = sampling;
              s.n = n;
              s.sigma = sigma;
              s.seed = seed;
              s.model = model;
              s.model_config = config.model_config;
              s.isofor = config.isofor;
              s.domains = config.domains;
              s.solver = config.solver;
              specs.push_back(std::move(s));
            }
          }
        }
      }
    }
  }
  return specs;
}

// ---------------------------------------------------------------- CSV

const std::vector<std::string> kCsvColumns = {
    "function", "sampling", "n", "sigma", "seed", "model", "domain",
    "function_value_error", "optimal_value_error", "optimal_solution_error", "feasibility_error",
    "status", "setup_seconds", "solve_seconds"};

void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
}

void write_csv_rows(std::ostream& out, const ExperimentResult& result, bool record_timings) {
  for (const CsvRow& r : rows_of(result, record_timings)) {
    out << r.function << ',' << r.sampling << ',' << r.n << ',' << fmt_short(r.sigma) << ',' << r.seed
        << ',' << r.model << ',' << r.domain << ',' << fmt_optional(r.record.function_value) << ','
        << fmt_optional(r.record.optimal_value) << ',' << fmt_optional(r.record.optimal_solution) << ','
        << fmt_optional(r.record.feasibility) << ',' << metrics::status_name(r.record.status) << ','
        << fmt_double(r.record.setup_seconds) << ',' << fmt_double(r.record.solve_seconds) << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i >= header.size()) throw ParseError("missing column '" + kCsvColumns[i] + "'");
    if (header[i] != kCsvColumns[i]) {
      throw ParseError("unexpected column '" + header[i] + "' at position " + std::to_string(i + 1) +
                       ", expected '" + kCsvColumns[i] + "'");
    }
  }
  if (header.size() > kCsvColumns.size()) {
    throw ParseError("unexpected column '" + header[kCsvColumns.size()] + "'");
  }
  std::vector<CsvRow> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != kCsvColumns.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(kCsvColumns.size()) +
                       " fields, got " + std::to_string(f.size()));
    }
    CsvRow r;
    r.function = f[0];
    r.sampling = f[1];
    r.n = parse_int<int>(f[2], row, kCsvColumns[2]);
    r.sigma = parse_double(f[3], row, kCsvColumns[3]);
    r.seed = parse_int<std::uint64_t>(f[4], row, kCsvColumns[4]);
    r.model = f[5];
    r.domain = f[6];
    r.record.function_value = parse_optional(f[7], row, kCsvColumns[7]);
    r.record.optimal_value = parse_optional(f[8], row, kCsvColumns[8]);
    r.record.optimal_solution = parse_optional(f[9], row, kCsvColumns[9]);
    r.record.feasibility = parse_optional(f[10], row, kCsvColumns[10]);
    try {
      r.record.status = metrics::parse_status(f[11]);
    } catch (const ParseError&) {
      throw ParseError(row_error(row, kCsvColumns[11], f[11]));
    }
    r.record.setup_seconds = parse_double(f[12], row, kCsvColumns[12]);
    r.record.solve_seconds = parse_double(f[13], row, kCsvColumns[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------- report

std::vector<metrics::LabeledRecord> label_records(const std::vector<ExperimentResult>& results) {
  std::vector<CsvRow> rows;
  for (const ExperimentResult& r : results) {
    for (CsvRow& row : rows_of(r, true)) rows.push_back(std::move(row));
  }
  return label_rows(rows);
}

Report emit_report(const std::vector<CsvRow>& rows) {
  Report report;
  report.markdown = "# Results\n\nMedians divided by the Box median of the same group; minima in bold.\n\n";
  const std::vector<metrics::LabeledRecord> labeled = label_rows(rows);
  if (labeled.empty()) {
    report.markdown += "No records.\n";
    return report;
  }
  for (metrics::ErrorType e : metrics::kErrorTypes) {
    const metrics::AggregateTable t =
        metrics::aggregate(labeled, e, metrics::Statistic::Median, "Box", false);
    report.markdown += "## " + std::string(metrics::error_name(e)) + "\n\n" + metrics::to_markdown(t) + "\n";
    std::string kept = "Instances kept (dropped):";
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      kept += (g ? ", " : " ") + t.groups[g] + " " + std::to_string(t.instances[g]) + " (" +
              std::to_string(t.dropped[g]) + ")";
    }
    report.markdown += kept + "\n\n";
  }
  ratio_section(rows, report);
  return report;
}

Report emit_report(const std::vector<std::filesystem::path>& csv_files) {
  std::vector<CsvRow> rows;
  for (const auto& path : csv_files) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path.string());
    try {
      for (CsvRow& r : read_csv(in)) rows.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return emit_report(rows);
}

// ---------------------------------------------------------------- suite

SuiteSummary run_suite(const RunConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec || !std::filesystem::is_directory(config.output_dir)) {
    throw ConfigError("cannot create output directory " + config.output_dir.string());
  }
  SuiteSummary summary;
  summary.csv = config.output_dir / "results.csv";
  summary.report = config.output_dir / "report.md";
  summary.manifest = config.output_dir / "manifest.json";
  {
    std::ofstream probe(summary.csv);
    if (!probe) throw ConfigError("output directory is not writable: " + config.output_dir.string());
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ExperimentSpec> specs = expand_grid(config);
  const std::vector<ExperimentResult> results = run_specs(specs, config.parallelism);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream csv;
  write_csv_header(csv);
  json experiments = json::array();
  for (const ExperimentResult& r : results) {
    write_csv_rows(csv, r, config.record_timings);
    json outcomes = json::array();
    for (const DomainOutcome& o : r.outcomes) {
      ++summary.records;
      if (!o.record.optimal()) ++summary.failures;
      json jo{{"domain", o.domain},
              {"status", std::string(metrics::status_name(o.record.status))},
              {"nodes", o.nodes},
              {"setup_seconds", o.record.setup_seconds},
              {"solve_seconds", o.record.solve_seconds}};
      if (!o.message.empty()) jo["message"] = o.message;
      outcomes.push_back(std::move(jo));
    }
    for (const std::string& v : r.violations) summary.violations.push_back(v);
    experiments.push_back({{"function", r.spec.function_label()},
                           {"sampling", std::string(bench::sampling_name(r.spec.sampling))},
                           {"n", r.spec.n},
                           {"sigma", r.spec.sigma},
                           {"seed", r.spec.seed},
                           {"model", std::string(learn::model_kind_name(r.spec.model))},
                           {"train_seconds", r.train_seconds},
                           {"domains", std::move(outcomes)}});
  }
  summary.experiments = static_cast<int>(results.size());

  std::ofstream(summary.csv) << csv.str();
  std::istringstream reread(csv.str());
  const Report report = emit_report(read_csv(reread));
  std::ofstream(summary.report) << report.markdown;
  if (!report.ratio_csv.empty()) std::ofstream(config.output_dir / "ratio_histogram.csv") << report.ratio_csv;

  const json manifest{{"version", CLEARN_VERSION},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"config", config_to_json(config)},
                      {"total_seconds", total},
                      {"experiments", std::move(experiments)},
                      {"violations", summary.violations}};
  std::ofstream(summary.manifest) << manifest.dump(2) << '\n';
  return summary;
}

// ---------------------------------------------------------------- domains

vdom::ValidityDomainSpec make_domain(vdom::DomainKind kind, double epsilon) {
  vdom::ValidityDomainSpec s;
  s.kind = kind;
  s.epsilon = epsilon;
  s.append_objective = s.extended();
  return s;
}

std::vector<vdom::ValidityDomainSpec> default_benchmark_domains() {
  return {make_domain(vdom::DomainKind::Box), make_domain(vdom::DomainKind::CH),
          make_domain(vdom::DomainKind::IsoFor), make_domain(vdom::DomainKind::CHplus)};
}

}  // namespace clearn::runner
