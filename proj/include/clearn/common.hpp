#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace clearn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexVector = Eigen::VectorXi;

// Error hierarchy. Every failure the toolkit reports derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class BoundError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned box with finite bounds.
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {}

  static Box uniform(int dim, double lo, double hi) {
    return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
  }

  int dim() const { return static_cast<int>(lower.size()); }
  Vector width() const { return upper - lower; }
  double diameter() const { return width().norm(); }

  bool contains(const Eigen::Ref<const Vector>& x, double tol = 0.0) const {
    return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
  }
};

}  // namespace clearn
