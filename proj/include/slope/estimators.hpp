#pragma once

#include "slope/solver.hpp"
#include "slope/weights.hpp"

namespace slope {

struct ThresholdFit {
  Vector beta_hat;
  double threshold = 0.0;  // +infinity when nothing is rejected
  Eigen::Index rejections = 0;
};

/// BH step-up hard thresholding: keep y_i whenever |y_i| >= |y|_(R) with
/// R the last index where |y|_(i)/sigma clears the critical curve.
ThresholdFit fdr_hard_threshold(const Vector& y, double q, double sigma);

/// SLOPE under the identity design.
Vector slope_orthogonal(const Vector& y, const WeightVector& lambda);

/// Soft-threshold the i-th largest magnitude at sigma * lambda^BH_i.
/// Intentionally neither monotone nor continuous in y.
Vector sequential_fdr_soft(const Vector& y, double q, double sigma);

struct SureFit {
  double lambda_hat = 0.0;
  Vector beta_hat;
  std::vector<double> grid;         // evaluation points, sorted
  std::vector<double> sure_values;  // SURE at each grid point
};

/// Minimize SURE(lambda) = p sigma^2 + sum y_i^2 ^ lambda^2
/// - 2 sigma^2 #{|y_i| <= lambda} over the grid augmented with the |y_i|
/// breakpoints, then soft-threshold at the minimizer (smallest on ties).
SureFit sure_soft_threshold(const Vector& y, double sigma,
                            const std::vector<double>& grid);

/// One proximal-gradient step from the ground truth:
/// prox_lambda(beta + X'z). Diagnostic only.
Vector one_step_oracle(const Design& X, const Vector& z, const Vector& beta,
                       const WeightVector& lambda);

}  // namespace slope
