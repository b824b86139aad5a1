#pragma once

#include "slope/sorted_l1.hpp"

namespace slope {

/// Inverse standard normal CDF. Piecewise rational initial guess refined
/// by a Halley step against an erfc-based Phi; relative error below 1e-13
/// for alpha in [1e-300, 1 - 1e-16].
double normal_quantile(double alpha);

/// Standard normal CDF, complementary-error-function based.
double normal_cdf(double x);

/// lambda_i = sigma * Phi^{-1}(1 - i q / (2p)), i = 1..p.
WeightVector bh_weights(double q, Eigen::Index p, double sigma);

/// lambda_j = sigma * sqrt(2 log(p/j)), with the last entry exactly 0.
WeightVector sqrtlog_weights(Eigen::Index p, double sigma);

/// sum_{j<=k} lambda_j^2
double weight_energy(const WeightVector& lambda, Eigen::Index k);

enum class WeightKind { Bh, InflatedBh, SqrtLog };

struct WeightSchedule {
  WeightKind kind = WeightKind::Bh;
  double q = 0.1;
  double epsilon = 0.0;  // InflatedBh only
  Eigen::Index p = 1;
  double sigma = 1.0;

  WeightVector materialize() const;
};

}  // namespace slope
