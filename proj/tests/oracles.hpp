// Independent verification oracles for the test suite. These deliberately
// avoid the production code paths: the quantile is a plain bisection on an
// erfc-based CDF, the lasso is coordinate descent, and the step-up rule is
// phrased through two-sided p-values.
#pragma once

#include "slope/solver.hpp"

#include <cmath>
#include <vector>

namespace oracles {

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Inverse normal CDF by bisection; ~1e-14 accurate for moderate alpha.
/// Reduced to the lower tail so erfc keeps its relative accuracy.
inline double quantile_bisect(double alpha) {
  if (alpha > 0.5) return -quantile_bisect(1.0 - alpha);
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_cdf(mid) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Coordinate-descent lasso: min 1/2 ||y - Xb||^2 + lam ||b||_1.
inline slope::Vector lasso_cd(const slope::Matrix& X, const slope::Vector& y,
                              double lam, int sweeps = 100000,
                              double tol = 1e-13) {
  const Eigen::Index p = X.cols();
  slope::Vector b = slope::Vector::Zero(p);
  slope::Vector r = y;  // residual y - Xb
  slope::Vector colsq(p);
  for (Eigen::Index j = 0; j < p; ++j) colsq[j] = X.col(j).squaredNorm();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (colsq[j] == 0.0) continue;
      const double rho = X.col(j).dot(r) + colsq[j] * b[j];
      const double mag = std::max(std::abs(rho) - lam, 0.0);
      const double bj = mag == 0.0 ? 0.0 : std::copysign(mag / colsq[j], rho);
      const double delta = bj - b[j];
      if (delta != 0.0) {
        r -= delta * X.col(j);
        b[j] = bj;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) break;
  }
  return b;
}

/// Textbook step-up count on two-sided p-values p_i = 2(1 - Phi(|y_i|/s)):
/// R = max { i : p_(i) <= i q / p }.
inline Eigen::Index step_up_rejections(const slope::Vector& y, double q,
                                       double sigma) {
  const Eigen::Index p = y.size();
  std::vector<double> pvals(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    pvals[std::size_t(i)] = 2.0 * (1.0 - phi_cdf(std::abs(y[i]) / sigma));
  }
  std::sort(pvals.begin(), pvals.end());
  Eigen::Index r = 0;
  for (Eigen::Index i = 1; i <= p; ++i) {
    if (pvals[std::size_t(i - 1)] <= double(i) * q / double(p)) r = i;
  }
  return r;
}

/// SURE by direct summation at one threshold.
inline double sure_direct(const slope::Vector& y, double sigma, double lam) {
  const double s2 = sigma * sigma;
  double acc = double(y.size()) * s2;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    acc += std::min(y[i] * y[i], lam * lam);
    if (std::abs(y[i]) <= lam) acc -= 2.0 * s2;
  }
  return acc;
}

}  // namespace oracles
