#include "clearn/learn/isolation_forest.hpp"
#include "clearn/learn/regressor.hpp"
#include "clearn/learn/serialize.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

namespace clearn::learn {
namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(values.size(), 1);
  int i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

struct FigureOne {
  Matrix x = column({1.0, 1.75, 2.25, 3.0});
  Vector y;
  FigureOne() {
    y.resize(4);
    for (int i = 0; i < 4; ++i) y(i) = (x(i, 0) - 1.75) * (x(i, 0) - 1.75);
  }
};

TEST(Scaler, MinMaxRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(3.0, 10.0);
  Matrix data(50, 3);
  for (Eigen::Index i = 0; i < data.size(); ++i) data(i) = g(rng);
  const Scaler s = Scaler::fit_minmax(data);
  const Matrix z = s.transform_rows(data);
  EXPECT_NEAR(z.minCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(z.maxCoeff(), 1.0, 1e-15);
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(z.col(j).minCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(z.col(j).maxCoeff(), 1.0, 1e-15);
  }
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Vector back = s.inverse(s.transform(Vector(data.row(i).transpose())));
    EXPECT_LE((back - data.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Scaler, StandardizeMomentsAndErrors) {
  const Matrix data = column({1.0, 2.0, 3.0, 4.0});
  const Scaler s = Scaler::fit_standardize(data);
  const Matrix z = s.transform_rows(data);
  EXPECT_NEAR(z.mean(), 0.0, 1e-15);
  EXPECT_NEAR(z.array().square().mean(), 1.0, 1e-14);
  EXPECT_NEAR(s.inverse(s.transform(2.5)), 2.5, 1e-12);
  EXPECT_THROW(Scaler::fit_standardize(column({1.0})), ArgumentError);
}

TEST(Linear, FigureOneLine) {
  const FigureOne f;
  const TrainedRegressor m = train_regressor(ModelKind::Linear, {}, f.x, f.y, 0);
  EXPECT_NEAR(m.predict(Vector::Constant(1, 1.0)), 0.09375, 1e-12);
  EXPECT_NEAR(m.predict(Vector::Constant(1, 1.375)), 0.28125, 1e-12);
  EXPECT_NEAR(m.predict(Vector::Constant(1, 0.0)), -0.40625, 1e-12);
  EXPECT_NEAR(m.predict(Vector::Constant(1, 2.0)) - m.predict(Vector::Constant(1, 1.0)), 0.5, 1e-12);
}

TEST(Linear, FigureOneRSquared) {
  const FigureOne f;
  const TrainedRegressor m = train_regressor(ModelKind::Linear, {}, f.x, f.y, 0);
  // Residuals are +-0.46875, SST = 1.41015625.
  const double sse = 4 * 0.46875 * 0.46875;
  EXPECT_NEAR(r2_score(m, f.x, f.y), 1.0 - sse / 1.41015625, 1e-12);
}

TEST(RSquared, PerfectAndMeanPredictors) {
  const Vector t = (Vector(4) << 1.0, 3.0, 2.0, 6.0).finished();
  EXPECT_DOUBLE_EQ(r2_score(t, t), 1.0);
  EXPECT_NEAR(r2_score(Vector::Constant(4, t.mean()), t), 0.0, 1e-15);
  EXPECT_THROW(r2_score(t, Vector::Constant(4, 2.0)), UndefinedScoreError);
}

TEST(Training, RejectsBadData) {
  EXPECT_THROW(train_regressor(ModelKind::Linear, {}, column({1.0}), Vector::Ones(1), 0),
               ArgumentError);
  Vector bad = Vector::Ones(2);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train_regressor(ModelKind::Linear, {}, column({1.0, 2.0}), bad, 0), DataError);
  EXPECT_THROW(parse_model_kind("Svm"), ConfigError);
}

TEST(Tree, DepthZeroIsTheMean) {
  const FigureOne f;
  RegressorConfig cfg;
  cfg.max_depth = 0;
  const TrainedRegressor m = train_regressor(ModelKind::Tree, cfg, f.x, f.y, 0);
  EXPECT_EQ(m.trees.front().nodes.size(), 1u);
  EXPECT_NEAR(m.predict(Vector::Constant(1, -7.0)), f.y.mean(), 1e-12);
}

Matrix random_inputs(std::mt19937_64& rng, int n, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  return x;
}

TEST(Tree, TrainingPointsPredictTheirLeafMean) {
  std::mt19937_64 rng(4);
  const Matrix x = random_inputs(rng, 60, 2, -3.0, 3.0);
  Vector y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::sin(x(i, 0)) + x(i, 1) * x(i, 1);
  RegressorConfig cfg;
  cfg.max_depth = 3;
  const TrainedRegressor m = train_regressor(ModelKind::Tree, cfg, x, y, 0);
  const Tree& tree = m.trees.front();
  EXPECT_LE(tree.depth(), 3);
  const Matrix z = m.input_scaler.transform_rows(x);
  std::map<int, std::pair<double, int>> groups;
  for (int i = 0; i < 60; ++i) {
    auto& g = groups[tree.leaf_index(z.row(i).transpose())];
    g.first += y(i);
    g.second += 1;
  }
  for (int i = 0; i < 60; ++i) {
    const auto& g = groups[tree.leaf_index(z.row(i).transpose())];
    EXPECT_NEAR(m.predict(x.row(i).transpose()), g.first / g.second, 1e-9);
  }
}

TEST(Tree, DeepTreeInterpolatesDistinctPoints) {
  std::mt19937_64 rng(5);
  const Matrix x = random_inputs(rng, 30, 1, 0.0, 1.0);
  Vector y = random_inputs(rng, 30, 1, -1.0, 1.0).col(0);
  RegressorConfig cfg;
  cfg.max_depth = 40;
  const TrainedRegressor m = train_regressor(ModelKind::Tree, cfg, x, y, 0);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(m.predict(x.row(i).transpose()), y(i), 1e-9);
}

TEST(Forest, PredictionIsMemberMean) {
  std::mt19937_64 rng(6);
  const Matrix x = random_inputs(rng, 80, 3, -2.0, 2.0);
  Vector y(80);
  for (int i = 0; i < 80; ++i) y(i) = x.row(i).squaredNorm();
  RegressorConfig cfg;
  cfg.trees = 4;
  cfg.max_depth = 3;
  const TrainedRegressor m = train_regressor(ModelKind::Forest, cfg, x, y, 11);
  ASSERT_EQ(m.trees.size(), 4u);
  for (int i = 0; i < 10; ++i) {
    const Vector z = m.input_scaler.transform(x.row(i).transpose());
    double sum = 0.0;
    for (const Tree& t : m.trees) sum += t.predict(z);
    EXPECT_DOUBLE_EQ(m.predict_scaled(z), sum / 4.0);
  }
}

TEST(Boosted, ZeroLearningRatePredictsBase) {
  std::mt19937_64 rng(7);
  const Matrix x = random_inputs(rng, 40, 2, -1.0, 1.0);
  Vector y = x.col(0) * 3.0 + x.col(1);
  RegressorConfig cfg;
  cfg.trees = 5;
  cfg.learning_rate = 0.0;
  const TrainedRegressor m = train_regressor(ModelKind::Boosted, cfg, x, y, 1);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(m.predict(x.row(i).transpose()), y.mean(), 1e-12);
}

TEST(Boosted, StagesImproveTrainingFit) {
  std::mt19937_64 rng(8);
  const Matrix x = random_inputs(rng, 100, 2, -1.0, 1.0);
  Vector y(100);
  for (int i = 0; i < 100; ++i) y(i) = std::cos(3 * x(i, 0)) + x(i, 1);
  RegressorConfig few, many;
  few.trees = 2;
  many.trees = 30;
  const double r_few = r2_score(train_regressor(ModelKind::Boosted, few, x, y, 1), x, y);
  const double r_many = r2_score(train_regressor(ModelKind::Boosted, many, x, y, 1), x, y);
  EXPECT_GT(r_many, r_few);
}

// Plain loops over std::vector, independent of the Eigen forward pass.
double reference_forward(const Mlp& net, const Vector& z) {
  std::vector<double> a(z.data(), z.data() + z.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    std::vector<double> next(layer.weights.rows());
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      double s = layer.bias(i);
      for (std::size_t j = 0; j < a.size(); ++j) s += layer.weights(i, j) * a[j];
      next[i] = (l + 1 < net.layers.size() && s < 0.0) ? 0.0 : s;
    }
    a = std::move(next);
  }
  return a[0];
}

TEST(Mlp, ForwardMatchesReference) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Mlp net;
  const std::vector<int> widths{3, 7, 5, 1};
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.weights.resize(widths[l + 1], widths[l]);
    layer.bias.resize(widths[l + 1]);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights(i) = g(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = g(rng);
    net.layers.push_back(layer);
  }
  for (int k = 0; k < 100; ++k) {
    Vector z(3);
    for (int j = 0; j < 3; ++j) z(j) = g(rng);
    EXPECT_NEAR(net.forward(z), reference_forward(net, z), 1e-9);
  }
}

TEST(Mlp, ZeroWeightsGiveUnscaledBias) {
  const FigureOne f;
  TrainedRegressor m = train_regressor(ModelKind::Mlp, {}, f.x, f.y, 3);
  for (DenseLayer& l : m.mlp.layers) l.weights.setZero();
  m.mlp.layers.back().bias(0) = 0.7;
  const double expected = m.target_scaler.inverse(0.7);
  EXPECT_NEAR(m.predict(Vector::Constant(1, 2.9)), expected, 1e-12);
  EXPECT_NEAR(m.predict(Vector::Constant(1, -1.0)), expected, 1e-12);
}

TEST(Mlp, DeterministicGivenSeed) {
  std::mt19937_64 rng(10);
  const Matrix x = random_inputs(rng, 50, 2, 0.0, 1.0);
  const Vector y = x.col(0) - x.col(1);
  RegressorConfig cfg;
  cfg.epochs = 20;
  const TrainedRegressor a = train_regressor(ModelKind::Mlp, cfg, x, y, 42);
  const TrainedRegressor b = train_regressor(ModelKind::Mlp, cfg, x, y, 42);
  const TrainedRegressor c = train_regressor(ModelKind::Mlp, cfg, x, y, 43);
  EXPECT_EQ(a.mlp.layers[0].weights, b.mlp.layers[0].weights);
  EXPECT_NE(a.mlp.layers[0].weights, c.mlp.layers[0].weights);
}

TEST(Mlp, FitsBealeOnHeldOutSplit) {
  const bench::GroundTruth gt = bench::make_ground_truth("Beale");
  const bench::Dataset data = bench::sample_dataset(
      gt, bench::make_rule(bench::SamplingKind::Uniform, gt), 500, 0.0, 2023);
  const TrainedRegressor m =
      train_regressor(ModelKind::Mlp, {}, data.inputs.topRows(400), data.noisy_values.head(400), 2023);
  EXPECT_GE(r2_score(m, data.inputs.bottomRows(100), data.clean_values.tail(100)), 0.75);
}

TEST(Serialize, RoundTripsEveryKind) {
  std::mt19937_64 rng(12);
  const Matrix x = random_inputs(rng, 40, 2, -1.0, 1.0);
  Vector y(40);
  for (int i = 0; i < 40; ++i) y(i) = x(i, 0) * x(i, 1) + 0.3 * x(i, 0);
  RegressorConfig cfg;
  cfg.trees = 3;
  cfg.max_depth = 3;
  cfg.epochs = 5;
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Tree, ModelKind::Forest,
                         ModelKind::Boosted, ModelKind::Mlp}) {
    const TrainedRegressor m = train_regressor(kind, cfg, x, y, 5);
    std::stringstream ss;
    write_regressor(m, ss);
    const TrainedRegressor back = read_regressor(ss);
    for (int i = 0; i < 40; ++i) {
      EXPECT_EQ(back.predict(x.row(i).transpose()), m.predict(x.row(i).transpose()))
          << model_kind_name(kind);
    }
  }
  std::istringstream junk("clearn-regressor 1 Tree scaler bogus");
  EXPECT_THROW(read_regressor(junk), ParseError);
}

TEST(IsolationForest, SinglePointGivesRootLeaves) {
  const IsolationForestModel f = train_isolation_forest(column({2.0}), {5, 5, 256}, 1);
  EXPECT_TRUE(f.subsample_clamped);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(f.trees[t].nodes.size(), 1u);
    EXPECT_EQ(path_length(f, t, Vector::Constant(1, 100.0)), 0);
  }
}

TEST(IsolationForest, TwoPointsSplitAtDepthOne) {
  Matrix x(2, 2);
  x << 0.0, 0.0, 10.0, 10.0;
  const IsolationForestModel f = train_isolation_forest(x, {8, 5, 2}, 3);
  for (int t = 0; t < 8; ++t) {
    EXPECT_EQ(f.trees[t].nodes.size(), 3u);
    EXPECT_EQ(path_length(f, t, x.row(0).transpose()), 1);
    EXPECT_EQ(path_length(f, t, x.row(1).transpose()), 1);
    const IsoNode& root = f.trees[t].nodes[0];
    EXPECT_GE(root.threshold, 0.0);
    EXPECT_LT(root.threshold, 10.0);
  }
}

TEST(IsolationForest, DepthsAreBoundedAndThresholdsInRange) {
  std::mt19937_64 rng(13);
  const Matrix x = random_inputs(rng, 300, 3, -1.0, 1.0);
  const IsolationForestModel f = train_isolation_forest(x, {20, 5, 128}, 9);
  for (const IsolationTree& t : f.trees) {
    EXPECT_LE(t.max_leaf_depth(), 5);
    for (const IsoNode& n : t.nodes) {
      if (n.is_leaf()) continue;
      EXPECT_GE(n.threshold, -1.0);
      EXPECT_LE(n.threshold, 1.0);
    }
  }
  for (int k = 0; k < 50; ++k) {
    for (int t = 0; t < 20; ++t) {
      const int d = path_length(f, t, x.row(k).transpose());
      EXPECT_GE(d, 0);
      EXPECT_LE(d, 5);
    }
  }
}

TEST(IsolationForest, OutliersIsolateFaster) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  Matrix x(256, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  const IsolationForestModel f = train_isolation_forest(x, {100, 8, 256}, 15);
  double inside = 0.0, outside = 0.0;
  const Vector far = Vector::Constant(2, 6.0);
  for (int t = 0; t < 100; ++t) {
    for (int k = 0; k < 20; ++k) inside += path_length(f, t, x.row(k).transpose()) / 20.0;
    outside += path_length(f, t, far);
  }
  EXPECT_GE(inside, outside);
}

}  // namespace
}  // namespace clearn::learn
