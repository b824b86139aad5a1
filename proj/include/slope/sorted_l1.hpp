#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace slope {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Nonincreasing, nonnegative penalty sequence with a strictly positive
/// leading entry. Validated on construction.
class WeightVector {
 public:
  explicit WeightVector(Vector values);

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  /// (lambda_1, ..., lambda_m)
  WeightVector head(Eigen::Index m) const;
  /// lambda^{-[m]} = (lambda_{m+1}, ..., lambda_p)
  WeightVector drop_largest(Eigen::Index m) const;
  /// (1 + eps) * lambda
  WeightVector inflated(double eps) const;
  WeightVector scaled(double c) const;

  static WeightVector constant(Eigen::Index p, double value);

 private:
  Vector values_;
};

/// Stable permutation ordering |a| nonincreasingly; ties keep original
/// index order.
std::vector<Eigen::Index> magnitude_sort_permutation(const Vector& a);

/// |a| sorted nonincreasingly.
Vector sorted_magnitudes(const Vector& a);

/// J_lambda(b) = sum_i lambda_i |b|_(i)
double sorted_l1_norm(const Vector& b, const WeightVector& lambda);

/// Prefix-sum dominance of sorted magnitudes. `slack` relaxes every
/// prefix inequality; the default is an exact check.
bool majorizes(const Vector& a, const Vector& b, double slack = 0.0);

/// argmin_b 1/2 ||y - b||^2 + J_lambda(b), single-pass stack algorithm.
Vector prox_sorted_l1(const Vector& y, const WeightVector& lambda);

/// Same prox through isotonic regression (PAVA) on |y|_sorted - lambda
/// with clamping at zero.
Vector prox_sorted_l1_pava(const Vector& y, const WeightVector& lambda);

/// Runs both algorithms and throws std::logic_error if any coordinate
/// differs by more than 1e-12. Both are exact finite procedures, so a
/// disagreement signals a bug.
Vector prox_sorted_l1_checked(const Vector& y, const WeightVector& lambda);

/// ||prox_lambda(a)|| <= ||(|a| - lambda)_+||
bool prox_norm_bound_holds(const Vector& a, const WeightVector& lambda);

}  // namespace slope
