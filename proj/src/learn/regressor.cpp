#include "clearn/learn/regressor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

namespace clearn::learn {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 5> kKinds{{
    {ModelKind::Linear, "Linear"},
    {ModelKind::Tree, "Tree"},
    {ModelKind::Forest, "Forest"},
    {ModelKind::Boosted, "Boosted"},
    {ModelKind::Mlp, "Mlp"},
}};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Vector>& t, int max_depth,
              int max_features, std::uint64_t seed)
      : z_(z), t_(t), max_depth_(max_depth), max_features_(max_features), rng_(seed) {}

  Tree build(std::vector<int> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  void grow(std::vector<int> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    double sum = 0.0, sumsq = 0.0;
    for (int r : rows) {
      sum += t_(r);
      sumsq += t_(r) * t_(r);
    }
    const double n = static_cast<double>(rows.size());
    TreeNode leaf;
    leaf.value = sum / n;
    tree_.nodes.push_back(leaf);
    if (depth >= max_depth_ || rows.size() < 2) return;
    const double sse = std::max(0.0, sumsq - sum * sum / n);
    if (sse <= 1e-14 * std::max(1.0, sumsq)) return;

    const Split best = find_split(rows, sse);
    if (best.feature < 0) return;

    std::vector<int> left, right;
    for (int r : rows) (z_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    tree_.nodes[id].left = static_cast<int>(tree_.nodes.size());
    grow(std::move(left), depth + 1);
    tree_.nodes[id].right = static_cast<int>(tree_.nodes.size());
    grow(std::move(right), depth + 1);
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(z_.cols());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (max_features_ <= 0 || max_features_ >= d) return features;
    for (int k = 0; k < max_features_; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(features[k], features[pick(rng_)]);
    }
    features.resize(max_features_);
    std::sort(features.begin(), features.end());
    return features;
  }

  Split find_split(const std::vector<int>& rows, double sse) {
    Split best;
    const int n = static_cast<int>(rows.size());
    std::vector<std::pair<double, double>> col(n);
    for (int f : candidate_features()) {
      for (int k = 0; k < n; ++k) col[k] = {z_(rows[k], f), t_(rows[k])};
      std::sort(col.begin(), col.end());
      double total = 0.0, total_sq = 0.0;
      for (const auto& [v, y] : col) {
        total += y;
        total_sq += y * y;
      }
      double ls = 0.0, lsq = 0.0;
      for (int k = 1; k < n; ++k) {
        ls += col[k - 1].second;
        lsq += col[k - 1].second * col[k - 1].second;
        if (!(col[k - 1].first < col[k].first)) continue;
        const double nl = k, nr = n - k;
        const double rs = total - ls, rsq = total_sq - lsq;
        const double child = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
        const double gain = sse - child;
        if (gain > best.gain + 1e-12 * sse) {
          best.gain = gain;
          best.feature = f;
          double thr = 0.5 * (col[k - 1].first + col[k].first);
          if (!(thr < col[k].first)) thr = col[k - 1].first;
          best.threshold = thr;
        }
      }
    }
    return best;
  }

  const Eigen::Ref<const Matrix>& z_;
  const Eigen::Ref<const Vector>& t_;
  int max_depth_;
  int max_features_;
  std::mt19937_64 rng_;
  Tree tree_;
};

std::vector<int> all_rows(int n) {
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Mlp train_mlp(const Matrix& z, const Vector& t, const RegressorConfig& config,
              std::uint64_t seed) {
  if (config.hidden.empty()) throw ConfigError("MLP needs at least one hidden layer");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.step_size > 0.0)) {
    throw ConfigError("invalid MLP optimizer settings");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> widths{static_cast<int>(z.cols())};
  for (int h : config.hidden) {
    if (h < 1) throw ConfigError("hidden layer width must be positive");
    widths.push_back(h);
  }
  widths.push_back(1);

  Mlp net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double limit = std::sqrt(6.0 / widths[l]);
    std::uniform_real_distribution<double> u(-limit, limit);
    DenseLayer layer;
    layer.weights.resize(widths[l + 1], widths[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = u(rng);
    layer.bias = Vector::Zero(widths[l + 1]);
    net.layers.push_back(std::move(layer));
  }

  // Adam state.
  const std::size_t nl = net.layers.size();
  std::vector<Matrix> mw(nl), vw(nl);
  std::vector<Vector> mb(nl), vb(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    mw[l] = vw[l] = Matrix::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
    mb[l] = vb[l] = Vector::Zero(net.layers[l].bias.size());
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  const int n = static_cast<int>(z.rows());
  std::vector<int> order = all_rows(n);
  std::vector<Matrix> pre(nl), act(nl + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += config.batch_size) {
      const int b = std::min(config.batch_size, n - start);
      act[0].resize(z.cols(), b);
      Eigen::RowVectorXd target(b);
      for (int k = 0; k < b; ++k) {
        act[0].col(k) = z.row(order[start + k]).transpose();
        target(k) = t(order[start + k]);
      }
      for (std::size_t l = 0; l < nl; ++l) {
        pre[l] = (net.layers[l].weights * act[l]).colwise() + net.layers[l].bias;
        act[l + 1] = l + 1 < nl ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
      }
      Matrix delta = (act[nl] - target) / static_cast<double>(b);
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t l = nl; l-- > 0;) {
        const Matrix gw = delta * act[l].transpose();
        const Vector gb = delta.rowwise().sum();
        if (l > 0) {
          delta = (net.layers[l].weights.transpose() * delta).cwiseProduct(
              (pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        mw[l] = beta1 * mw[l] + (1.0 - beta1) * gw;
        vw[l] = beta2 * vw[l] + (1.0 - beta2) * gw.cwiseAbs2();
        mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb;
        vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb.cwiseAbs2();
        net.layers[l].weights.array() -= config.step_size * (mw[l].array() / c1) /
                                         ((vw[l].array() / c2).sqrt() + eps);
        net.layers[l].bias.array() -=
            config.step_size * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
      }
    }
  }
  return net;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  for (const auto& [kind, n] : kKinds) {
    if (n == name) return kind;
  }
  throw ConfigError("unknown model kind: " + std::string(name));
}

std::string_view model_kind_name(ModelKind kind) {
  for (const auto& [k, n] : kKinds) {
    if (k == kind) return n;
  }
  throw ConfigError("unknown model kind");
}

int Tree::leaf_index(const Eigen::Ref<const Vector>& z) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    id = z(node.feature) <= node.threshold ? node.left : node.right;
  }
  return id;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
  }
  return best;
}

int Tree::num_leaves() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double Mlp::forward(const Eigen::Ref<const Vector>& z) const {
  Vector a = z;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    a = layers[l].weights * a + layers[l].bias;
    if (l + 1 < layers.size()) a = a.cwiseMax(0.0);
  }
  return a(0);
}

double TrainedRegressor::predict_scaled(const Eigen::Ref<const Vector>& z) const {
  switch (kind) {
    case ModelKind::Linear: return linear_coef.dot(z) + linear_intercept;
    case ModelKind::Tree: return trees.front().predict(z);
    case ModelKind::Forest: {
      double sum = 0.0;
      for (const Tree& tree : trees) sum += tree.predict(z);
      return sum / static_cast<double>(trees.size());
    }
    case ModelKind::Boosted: {
      double sum = 0.0;
      for (const Tree& tree : trees) sum += tree.predict(z);
      return base + learning_rate * sum;
    }
    case ModelKind::Mlp: return mlp.forward(z);
  }
  throw ConfigError("unknown model kind");
}

double TrainedRegressor::predict(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != input_dim()) throw DimensionError("input dimension mismatch");
  return target_scaler.inverse(predict_scaled(input_scaler.transform(x)));
}

Vector TrainedRegressor::predict_rows(const Eigen::Ref<const Matrix>& inputs) const {
  Vector out(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) out(i) = predict(inputs.row(i).transpose());
  return out;
}

Tree fit_tree(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Vector>& t,
              const std::vector<int>& rows, int max_depth, int max_features,
              std::uint64_t seed) {
  if (rows.empty()) throw ArgumentError("tree needs at least one row");
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  return TreeBuilder(z, t, max_depth, max_features, seed).build(rows);
}

TrainedRegressor train_regressor(ModelKind kind, const RegressorConfig& config,
                                 const Eigen::Ref<const Matrix>& inputs,
                                 const Eigen::Ref<const Vector>& targets, std::uint64_t seed) {
  if (inputs.rows() != targets.size()) throw DimensionError("inputs and targets differ in length");
  if (inputs.rows() < 2) throw ArgumentError("training needs at least two points");
  if (!inputs.allFinite() || !targets.allFinite()) throw DataError("non-finite training data");

  TrainedRegressor model;
  model.kind = kind;
  model.input_scaler = Scaler::fit_minmax(inputs);
  model.target_scaler = Scaler::fit_standardize(targets);
  const Matrix z = model.input_scaler.transform_rows(inputs);
  const Vector t = model.target_scaler.transform_rows(targets).col(0);
  const int n = static_cast<int>(z.rows());
  const int d = static_cast<int>(z.cols());

  switch (kind) {
    case ModelKind::Linear: {
      Matrix design(n, d + 1);
      design.leftCols(d) = z;
      design.col(d).setOnes();
      const Vector beta = design.colPivHouseholderQr().solve(t);
      model.linear_coef = beta.head(d);
      model.linear_intercept = beta(d);
      break;
    }
    case ModelKind::Tree:
      model.trees.push_back(fit_tree(z, t, all_rows(n), config.max_depth, 0, seed));
      break;
    case ModelKind::Forest: {
      if (config.trees < 1) throw ConfigError("forest needs at least one tree");
      const int mf = config.max_features > 0
                         ? config.max_features
                         : std::max(1, static_cast<int>(std::floor(std::sqrt(double(d)))));
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int k = 0; k < config.trees; ++k) {
        std::vector<int> rows = all_rows(n);
        if (config.bootstrap) {
          for (int& r : rows) r = pick(rng);
        }
        model.trees.push_back(fit_tree(z, t, rows, config.max_depth, mf, rng()));
      }
      model.learning_rate = 1.0 / config.trees;
      break;
    }
    case ModelKind::Boosted: {
      if (config.trees < 1) throw ConfigError("boosting needs at least one stage");
      model.base = t.mean();
      model.learning_rate = config.learning_rate;
      Vector current = Vector::Constant(n, model.base);
      std::mt19937_64 rng(seed);
      for (int k = 0; k < config.trees; ++k) {
        const Vector residual = t - current;
        Tree tree = fit_tree(z, residual, all_rows(n), config.max_depth, 0, rng());
        for (int i = 0; i < n; ++i) current(i) += model.learning_rate * tree.predict(z.row(i).transpose());
        model.trees.push_back(std::move(tree));
      }
      break;
    }
    case ModelKind::Mlp:
      model.mlp = train_mlp(z, t, config, seed);
      break;
  }
  return model;
}

TrainedRegressor train_regressor(ModelKind kind, const RegressorConfig& config,
                                 const bench::Dataset& dataset, std::uint64_t seed) {
  if (dataset.size() < 1) throw ArgumentError("empty dataset");
  return train_regressor(kind, config, dataset.inputs, dataset.noisy_values, seed);
}

double r2_score(const Eigen::Ref<const Vector>& predictions, const Eigen::Ref<const Vector>& targets) {
  if (predictions.size() != targets.size()) throw DimensionError("length mismatch");
  if (targets.size() < 2) throw UndefinedScoreError("R^2 needs at least two targets");
  const double sst = (targets.array() - targets.mean()).square().sum();
  if (!(sst > 0.0)) throw UndefinedScoreError("R^2 undefined for constant targets");
  const double sse = (targets - predictions).squaredNorm();
  return 1.0 - sse / sst;
}

double r2_score(const TrainedRegressor& model, const Eigen::Ref<const Matrix>& inputs,
                const Eigen::Ref<const Vector>& targets) {
  return r2_score(model.predict_rows(inputs), targets);
}

}  // namespace clearn::learn
