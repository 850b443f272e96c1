#pragma once

#include "clearn/common.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

// Ground-truth benchmark functions, their box domains and known optima.
//
//   Beale        n=2   [-4.5,4.5]^2
//                (1.5 - x + xy)^2 + (2.25 - x + xy^2)^2 + (2.625 - x + xy^3)^2
//                x* = (3, 0.5), v* = 0
//   Griewank     n     [-600,600]^n
//                1 + sum x_i^2/4000 - prod cos(x_i / sqrt(i))
//                x* = 0, v* = 0
//   Peaks        n=2   [-3,3]^2
//                3(1-x)^2 e^{-x^2-(y+1)^2} - 10(x/5 - x^3 - y^5) e^{-x^2-y^2}
//                  - e^{-(x+1)^2-y^2}/3
//                x* = (0.228278908036454, -1.625534963952209), v* = f(x*) ~ -6.5511333
//   Powell       n%4=0 [-4,5]^n
//                sum_k (x_{4k-3} + 10x_{4k-2})^2 + 5(x_{4k-1} - x_{4k})^2
//                      + (x_{4k-2} - 2x_{4k-1})^4 + 10(x_{4k-3} - x_{4k})^4
//                x* = 0, v* = 0
//   Qing         n     [-500,500]^n
//                sum (x_i^2 - i)^2
//                x* = (sqrt 1, ..., sqrt n), v* = 0
//   Quintic      n     [-10,10]^n
//                sum |x_i^5 - 3x_i^4 + 4x_i^3 + 2x_i^2 - 10x_i - 4|
//                x* = (-1, ..., -1), v* = 0
//   Rastrigin    n     [-5.12,5.12]^n
//                10n + sum (x_i^2 - 10 cos(2 pi x_i))
//                x* = 0, v* = 0
//   RotatedHyperEllipsoid  n  [-200,200]^n
//                sum_i (x_1 + ... + x_i)^2
//                x* = 0, v* = 0
//
// Default dimensions: Beale 2, Griewank 4, Peaks 2, Powell 4, Qing 4,
// Quintic 4, Rastrigin 10, RotatedHyperEllipsoid 20.
namespace clearn::bench {

enum class Function {
  Beale,
  Griewank,
  Peaks,
  Powell,
  Qing,
  Quintic,
  Rastrigin,
  RotatedHyperEllipsoid,
};

template <typename Derived>
typename Derived::Scalar beale(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const S x = v(0), y = v(1);
  const S a = S(1.5) - x + x * y;
  const S b = S(2.25) - x + x * y * y;
  const S c = S(2.625) - x + x * y * y * y;
  return a * a + b * b + c * c;
}

template <typename Derived>
typename Derived::Scalar griewank(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum(0), prod(1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) / S(4000);
    prod *= std::cos(x(i) / std::sqrt(S(i + 1)));
  }
  return S(1) + sum - prod;
}

template <typename Derived>
typename Derived::Scalar peaks(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const S x = v(0), y = v(1);
  return S(3) * (S(1) - x) * (S(1) - x) * std::exp(-x * x - (y + S(1)) * (y + S(1))) -
         S(10) * (x / S(5) - x * x * x - std::pow(y, 5)) * std::exp(-x * x - y * y) -
         std::exp(-(x + S(1)) * (x + S(1)) - y * y) / S(3);
}

template <typename Derived>
typename Derived::Scalar powell(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum(0);
  for (Eigen::Index k = 0; k + 3 < x.size(); k += 4) {
    const S a = x(k) + S(10) * x(k + 1);
    const S b = x(k + 2) - x(k + 3);
    const S c = x(k + 1) - S(2) * x(k + 2);
    const S d = x(k) - x(k + 3);
    sum += a * a + S(5) * b * b + c * c * c * c + S(10) * d * d * d * d;
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar qing(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const S t = x(i) * x(i) - S(i + 1);
    sum += t * t;
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar quintic(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const S t = x(i);
    // Horner form of t^5 - 3t^4 + 4t^3 + 2t^2 - 10t - 4
    const S p = ((((t - S(3)) * t + S(4)) * t + S(2)) * t - S(10)) * t - S(4);
    sum += std::abs(p);
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar rastrigin(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum = S(10) * S(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) - S(10) * std::cos(S(2) * std::numbers::pi_v<S> * x(i));
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar rotated_hyper_ellipsoid(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  S sum(0), partial(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    partial += x(i);
    sum += partial * partial;
  }
  return sum;
}

struct GroundTruth {
  std::string name;
  Function function = Function::Beale;
  int n1 = 0;
  Box box;
  Vector x_star;
  double v_star = 0.0;

  double evaluate(const Eigen::Ref<const Vector>& x) const;
};

Function parse_function(std::string_view name);
std::string_view function_name(Function f);
const std::vector<std::string>& supported_functions();

/// Ground truth with its standard box and optimum. n1 = 0 selects the
/// default dimension; fixed-dimension functions reject any other value.
GroundTruth make_ground_truth(std::string_view name, int n1 = 0);

/// Evaluates a named benchmark at x, checking the dimension against what the
/// function accepts (exactly 2 for Beale/Peaks, a multiple of 4 for Powell).
double evaluate_ground_truth(std::string_view name, const Eigen::Ref<const Vector>& x);

/// Euclidean length of the box diagonal.
double domain_diameter(const GroundTruth& gt);

enum class SamplingKind { Uniform, Normal };

struct SamplingRule {
  SamplingKind kind = SamplingKind::Uniform;
  double rho = 0.0;  // per-coordinate standard deviation, Normal only
};

SamplingKind parse_sampling(std::string_view name);
std::string_view sampling_name(SamplingKind kind);

/// Normal-rule standard deviation: one sixth of the distance from x* to the
/// boundary of the box.
double normal_rho(const GroundTruth& gt);
SamplingRule make_rule(SamplingKind kind, const GroundTruth& gt);

struct Dataset {
  Matrix inputs;  // N x n1, one point per row
  Vector clean_values;
  Vector noisy_values;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
};

/// Draws N points with the rule, evaluates the ground truth, then adds
/// zero-mean Gaussian noise with standard deviation sigma * std(clean values).
/// Inputs are drawn before noise from a single generator seeded with `seed`.
Dataset sample_dataset(const GroundTruth& gt, const SamplingRule& rule, int n, double sigma,
                       std::uint64_t seed);

/// Population standard deviation.
double stddev(const Eigen::Ref<const Vector>& v);

}  // namespace clearn::bench
