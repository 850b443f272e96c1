#pragma once

#include "clearn/common.hpp"

namespace clearn::learn {

enum class ScalerKind { MinMaxToUnit, Standardize };

/// Per-feature affine map z = (x - offset) / scale.
struct Scaler {
  ScalerKind kind = ScalerKind::MinMaxToUnit;
  Vector offset;
  Vector scale;

  /// Maps each column's training min to 0 and max to 1. Constant columns get
  /// scale 1 so they map to 0.
  static Scaler fit_minmax(const Eigen::Ref<const Matrix>& data);

  /// Mean 0, population standard deviation 1 per column. Needs at least two
  /// rows; constant columns get scale 1.
  static Scaler fit_standardize(const Eigen::Ref<const Matrix>& data);

  int dim() const { return static_cast<int>(offset.size()); }

  Vector transform(const Eigen::Ref<const Vector>& x) const;
  Vector inverse(const Eigen::Ref<const Vector>& z) const;
  Matrix transform_rows(const Eigen::Ref<const Matrix>& rows) const;

  /// Scalar versions for the one-dimensional target scaler.
  double transform(double x) const { return (x - offset(0)) / scale(0); }
  double inverse(double z) const { return z * scale(0) + offset(0); }
};

}  // namespace clearn::learn
