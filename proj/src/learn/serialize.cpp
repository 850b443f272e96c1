#include "clearn/learn/serialize.hpp"

#include <istream>
#include <limits>
#include <ostream>

namespace clearn::learn {

namespace {

void write_scaler(std::ostream& out, const Scaler& s) {
  out << "scaler " << (s.kind == ScalerKind::MinMaxToUnit ? "minmax" : "standardize") << ' '
      << s.dim();
  for (Eigen::Index j = 0; j < s.offset.size(); ++j) out << ' ' << s.offset(j);
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) out << ' ' << s.scale(j);
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void expect(std::string_view word) {
    const std::string got = token();
    if (got != word) {
      throw ParseError("expected '" + std::string(word) + "', got '" + got + "'");
    }
  }

  std::string token() {
    std::string s;
    if (!(in_ >> s)) throw ParseError("unexpected end of model text");
    return s;
  }

  double number() {
    const std::string s = token();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw ParseError("bad number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      throw ParseError("bad number '" + s + "'");
    }
  }

  int integer() {
    const double v = number();
    if (v != static_cast<int>(v)) throw ParseError("expected an integer");
    return static_cast<int>(v);
  }

  int count() {
    const int v = integer();
    if (v < 0) throw ParseError("negative count");
    return v;
  }

 private:
  std::istream& in_;
};

Scaler read_scaler(Reader& r) {
  r.expect("scaler");
  Scaler s;
  const std::string kind = r.token();
  if (kind == "minmax") {
    s.kind = ScalerKind::MinMaxToUnit;
  } else if (kind == "standardize") {
    s.kind = ScalerKind::Standardize;
  } else {
    throw ParseError("unknown scaler kind '" + kind + "'");
  }
  const int d = r.count();
  s.offset.resize(d);
  s.scale.resize(d);
  for (int j = 0; j < d; ++j) s.offset(j) = r.number();
  for (int j = 0; j < d; ++j) s.scale(j) = r.number();
  return s;
}

}  // namespace

void write_regressor(const TrainedRegressor& model, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "clearn-regressor 1 " << model_kind_name(model.kind) << '\n';
  write_scaler(out, model.input_scaler);
  write_scaler(out, model.target_scaler);
  out << "linear " << model.linear_coef.size();
  for (Eigen::Index j = 0; j < model.linear_coef.size(); ++j) out << ' ' << model.linear_coef(j);
  out << ' ' << model.linear_intercept << '\n';
  out << "ensemble " << model.trees.size() << ' ' << model.base << ' ' << model.learning_rate
      << '\n';
  for (const Tree& tree : model.trees) {
    out << "tree " << tree.nodes.size() << '\n';
    for (const TreeNode& n : tree.nodes) {
      out << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << ' ' << n.value
          << '\n';
    }
  }
  out << "mlp " << model.mlp.layers.size();
  if (!model.mlp.layers.empty()) {
    out << ' ' << model.mlp.layers.front().weights.cols();
    for (const DenseLayer& l : model.mlp.layers) out << ' ' << l.weights.rows();
  }
  out << '\n';
  for (const DenseLayer& l : model.mlp.layers) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) out << l.weights(i, j) << ' ';
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out << l.bias(i) << ' ';
    out << '\n';
  }
  out << "end\n";
  out.precision(old);
}

TrainedRegressor read_regressor(std::istream& in) {
  Reader r(in);
  r.expect("clearn-regressor");
  if (r.integer() != 1) throw ParseError("unsupported model format version");
  TrainedRegressor model;
  try {
    model.kind = parse_model_kind(r.token());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  model.input_scaler = read_scaler(r);
  model.target_scaler = read_scaler(r);
  if (model.target_scaler.dim() != 1) throw ParseError("target scaler must be one-dimensional");

  r.expect("linear");
  const int d = r.count();
  model.linear_coef.resize(d);
  for (int j = 0; j < d; ++j) model.linear_coef(j) = r.number();
  model.linear_intercept = r.number();

  r.expect("ensemble");
  const int trees = r.count();
  model.base = r.number();
  model.learning_rate = r.number();
  for (int k = 0; k < trees; ++k) {
    r.expect("tree");
    Tree tree;
    tree.nodes.resize(r.count());
    const int size = static_cast<int>(tree.nodes.size());
    for (TreeNode& n : tree.nodes) {
      n.feature = r.integer();
      n.threshold = r.number();
      n.left = r.integer();
      n.right = r.integer();
      n.value = r.number();
      if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size ||
                           n.feature >= model.input_scaler.dim())) {
        throw ParseError("tree node references out of range");
      }
    }
    if (size == 0) throw ParseError("empty tree");
    model.trees.push_back(std::move(tree));
  }

  r.expect("mlp");
  const int layers = r.count();
  if (layers > 0) {
    std::vector<int> widths(layers + 1);
    for (int& w : widths) w = r.count();
    for (int l = 0; l < layers; ++l) {
      DenseLayer layer;
      layer.weights.resize(widths[l + 1], widths[l]);
      layer.bias.resize(widths[l + 1]);
      for (int i = 0; i < widths[l + 1]; ++i)
        for (int j = 0; j < widths[l]; ++j) layer.weights(i, j) = r.number();
      for (int i = 0; i < widths[l + 1]; ++i) layer.bias(i) = r.number();
      model.mlp.layers.push_back(std::move(layer));
    }
  }
  r.expect("end");
  return model;
}

}  // namespace clearn::learn
