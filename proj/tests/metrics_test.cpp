#include "clearn/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

namespace clearn::metrics {
namespace {

TrueModel parabola() {
  TrueModel t;
  t.h = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm()); };
  t.x_star = Vector::Zero(2);
  t.v_star = 0.0;
  return t;
}

TEST(Errors, ZeroAtTheOptimum) {
  const TrueModel t = parabola();
  const ErrorRecord r = compute_errors(Vector::Zero(2), Vector::Zero(1), 0.0, t);
  EXPECT_TRUE(r.optimal());
  EXPECT_EQ(*r.function_value, 0.0);
  EXPECT_EQ(*r.optimal_value, 0.0);
  EXPECT_EQ(*r.optimal_solution, 0.0);
  EXPECT_FALSE(r.feasibility.has_value());
}

TEST(Errors, Definitions) {
  const TrueModel t = parabola();
  // h(x_hat) = 0.5, y_hat = 2.
  const Vector x = (Vector(2) << 0.5, 0.5).finished();
  const ErrorRecord r = compute_errors(x, Vector::Constant(1, 2.0), -0.25, t);
  EXPECT_DOUBLE_EQ(*r.function_value, 1.5);
  EXPECT_DOUBLE_EQ(*r.optimal_value, 0.25);
  EXPECT_DOUBLE_EQ(*r.optimal_solution, std::sqrt(0.5));

  TrueModel capped;
  capped.h = [](const Vector& v) { return Vector::Constant(1, v.norm()); };
  capped.x_star = Vector::Zero(1);
  capped.theta = [](const Vector& y) { return (y.array() - 1.0).matrix(); };
  EXPECT_NEAR(*compute_errors(Vector::Constant(1, 1.2), Vector::Constant(1, 1.0), 0.0, capped).feasibility,
              0.2, 1e-15);
  EXPECT_EQ(*compute_errors(Vector::Constant(1, 0.7), Vector::Constant(1, 1.0), 0.0, capped).feasibility,
            0.0);
  EXPECT_THROW(compute_errors(Vector::Zero(3), Vector::Zero(1), 0.0, t), DimensionError);
}

TEST(Errors, BenchmarkTruth) {
  const bench::GroundTruth gt = bench::make_ground_truth("Beale");
  const TrueModel t = true_model(gt);
  const ErrorRecord r = compute_errors(gt.x_star, Vector::Constant(1, gt.v_star), gt.v_star, t);
  EXPECT_NEAR(*r.function_value, 0.0, 1e-12);
  EXPECT_EQ(*r.optimal_solution, 0.0);
}

TEST(Statistics, MedianAndMean) {
  EXPECT_EQ(median({1.0, 2.0, 100.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_NEAR(mean({1.0, 2.0, 100.0}), 103.0 / 3.0, 1e-12);
  EXPECT_THROW(median({}), DataError);
}

LabeledRecord labeled(const std::string& group, const std::string& domain, int instance, double fv) {
  ErrorRecord r;
  r.status = RecordStatus::Optimal;
  r.function_value = fv;
  r.optimal_value = fv;
  r.optimal_solution = fv;
  return {group, domain, std::to_string(instance), r};
}

TEST(Aggregate, NormalizesAndMarksMinimum) {
  std::vector<LabeledRecord> recs;
  const double box[] = {1.0, 2.0, 3.0};
  const double chp[] = {0.4, 0.5, 0.6};
  const double ch[] = {2.0, 2.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    recs.push_back(labeled("Beale", "Box", i, box[i]));
    recs.push_back(labeled("Beale", "CH", i, ch[i]));
    recs.push_back(labeled("Beale", "CHplus", i, chp[i]));
  }
  const AggregateTable t = aggregate(recs, ErrorType::FunctionValue, Statistic::Median);
  EXPECT_EQ(t.at("Beale", "Box").value, 1.0);
  EXPECT_DOUBLE_EQ(t.at("Beale", "CHplus").value, 0.25);
  EXPECT_TRUE(t.at("Beale", "CHplus").minimum);
  EXPECT_FALSE(t.at("Beale", "CH").minimum);
  EXPECT_DOUBLE_EQ(t.at("Beale", "CH").value, 1.0);
  // CH ties Box exactly.
  const std::string md = to_markdown(t);
  EXPECT_NE(md.find("| CHplus | **0.25** |"), std::string::npos);
  EXPECT_NE(md.find("| Box | 1.00 |"), std::string::npos);
}

TEST(Aggregate, TiesAllMarkedAndEqualDomains) {
  std::vector<LabeledRecord> recs;
  for (int i = 0; i < 4; ++i) {
    for (const char* d : {"Box", "CH", "IsoFor"}) recs.push_back(labeled("g", d, i, 1.0 + i));
  }
  const AggregateTable t = aggregate(recs, ErrorType::OptimalValue, Statistic::Mean);
  for (const char* d : {"Box", "CH", "IsoFor"}) {
    EXPECT_EQ(t.at("g", d).value, 1.0);
    EXPECT_TRUE(t.at("g", d).minimum);
  }
}

TEST(Aggregate, ZeroReferenceIsFlagged) {
  std::vector<LabeledRecord> recs{labeled("g", "Box", 0, 0.0), labeled("g", "CH", 0, 1.0)};
  const AggregateTable t = aggregate(recs, ErrorType::FunctionValue, Statistic::Median);
  EXPECT_FALSE(t.at("g", "Box").defined);
  EXPECT_FALSE(t.at("g", "CH").defined);
  EXPECT_NE(to_markdown(t).find("n/a"), std::string::npos);
}

TEST(Aggregate, DropsIncompleteInstancesPairwise) {
  std::vector<LabeledRecord> recs;
  for (int i = 0; i < 5; ++i) {
    recs.push_back(labeled("g", "Box", i, 2.0));
    recs.push_back(labeled("g", "CH", i, i == 4 ? 100.0 : 1.0));
  }
  recs[0].record = failed_record(RecordStatus::LimitReached);  // Box, instance 0
  const AggregateTable t = aggregate(recs, ErrorType::FunctionValue, Statistic::Mean);
  EXPECT_EQ(t.dropped[0], 1);
  EXPECT_EQ(t.instances[0], 4);
  EXPECT_DOUBLE_EQ(t.at("g", "CH").raw, (3.0 + 100.0) / 4.0);
  // Feasibility is absent for every record, so every instance drops.
  const AggregateTable f = aggregate(recs, ErrorType::Feasibility, Statistic::Median);
  EXPECT_EQ(f.instances[0], 0);
  EXPECT_FALSE(f.at("g", "CH").defined);
}

TEST(Aggregate, MedianIgnoresOutlierInflation) {
  std::vector<LabeledRecord> recs;
  for (int i = 0; i < 7; ++i) {
    recs.push_back(labeled("g", "Box", i, 1.0 + i));
    recs.push_back(labeled("g", "CH", i, 0.5 + i));
  }
  const double before = aggregate(recs, ErrorType::FunctionValue, Statistic::Median).at("g", "CH").value;
  recs.back().record.function_value = 1e9;  // above the median
  const double after = aggregate(recs, ErrorType::FunctionValue, Statistic::Median).at("g", "CH").value;
  EXPECT_EQ(before, after);
}

TEST(Aggregate, MissingReferenceThrows) {
  std::vector<LabeledRecord> recs{labeled("g", "CH", 0, 1.0)};
  EXPECT_THROW(aggregate(recs, ErrorType::FunctionValue, Statistic::Median), ArgumentError);
}

TEST(Ratios, IdenticalAndSymmetric) {
  const std::vector<double> a{0.3, 1.0, 7.0};
  const RatioStats same = ratio_distribution_stats(a, a);
  EXPECT_EQ(same.fraction_below_one, 0.0);
  EXPECT_EQ(same.count, 3);

  const RatioStats sym = ratio_distribution_stats({0.1, 1.0, 10.0}, {1.0, 1.0, 1.0});
  EXPECT_NEAR(sym.skewness, 0.0, 1e-12);
  EXPECT_NEAR(sym.fraction_below_one, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(sym.histogram.size(), 20u);
  EXPECT_NEAR(sym.log10_edges.front(), -1.0, 1e-12);
  EXPECT_NEAR(sym.log10_edges.back(), 1.0, 1e-12);
  int total = 0;
  for (int c : sym.histogram) total += c;
  EXPECT_EQ(total, 3);
}

TEST(Ratios, ZeroHandling) {
  const RatioStats s = ratio_distribution_stats({0.0, 1.0, 2.0}, {1.0, 0.0, 4.0});
  EXPECT_EQ(s.zero_denominators, 1);
  EXPECT_EQ(s.zero_numerators, 1);
  EXPECT_EQ(s.count, 2);
  EXPECT_EQ(s.fraction_below_one, 1.0);
  EXPECT_THROW(ratio_distribution_stats({1.0}, {0.0}), DataError);
  EXPECT_THROW(ratio_distribution_stats({1.0}, {1.0, 2.0}), ArgumentError);
}

TEST(Moments, NormalSampleKurtosis) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(100000);
  for (double& x : v) x = g(rng);
  EXPECT_NEAR(kurtosis(v), 3.0, 0.1);
  EXPECT_NEAR(skewness(v), 0.0, 0.05);
  // Exponential: skewness 2, kurtosis 9.
  std::exponential_distribution<double> e(1.0);
  for (double& x : v) x = e(rng);
  EXPECT_NEAR(skewness(v), 2.0, 0.15);
}

TEST(Status, NamesRoundTrip) {
  for (RecordStatus s : {RecordStatus::Optimal, RecordStatus::Infeasible, RecordStatus::Unbounded,
                         RecordStatus::LimitReached, RecordStatus::Failed}) {
    EXPECT_EQ(parse_status(status_name(s)), s);
  }
  EXPECT_THROW(parse_status("Done"), ParseError);
}

}  // namespace
}  // namespace clearn::metrics
