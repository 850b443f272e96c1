#include "clearn/learn/scaler.hpp"

namespace clearn::learn {

Scaler Scaler::fit_minmax(const Eigen::Ref<const Matrix>& data) {
  if (data.rows() < 1) throw ArgumentError("min-max scaler needs at least one row");
  if (!data.allFinite()) throw DataError("non-finite value in scaler input");
  Scaler s;
  s.kind = ScalerKind::MinMaxToUnit;
  s.offset = data.colwise().minCoeff().transpose();
  s.scale = data.colwise().maxCoeff().transpose() - s.offset;
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
  }
  return s;
}

Scaler Scaler::fit_standardize(const Eigen::Ref<const Matrix>& data) {
  if (data.rows() < 2) throw ArgumentError("standardization needs at least two rows");
  if (!data.allFinite()) throw DataError("non-finite value in scaler input");
  Scaler s;
  s.kind = ScalerKind::Standardize;
  s.offset = data.colwise().mean().transpose();
  s.scale.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double var = (data.col(j).array() - s.offset(j)).square().mean();
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Vector Scaler::transform(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != offset.size()) throw DimensionError("scaler dimension mismatch");
  return (x - offset).cwiseQuotient(scale);
}

Vector Scaler::inverse(const Eigen::Ref<const Vector>& z) const {
  if (z.size() != offset.size()) throw DimensionError("scaler dimension mismatch");
  return z.cwiseProduct(scale) + offset;
}

Matrix Scaler::transform_rows(const Eigen::Ref<const Matrix>& rows) const {
  if (rows.cols() != offset.size()) throw DimensionError("scaler dimension mismatch");
  return (rows.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array();
}

}  // namespace clearn::learn
