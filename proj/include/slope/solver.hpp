#pragma once

#include "slope/sorted_l1.hpp"

namespace slope {

/// n x p design matrix.
struct Design {
  Matrix matrix;

  Eigen::Index n() const { return matrix.rows(); }
  Eigen::Index p() const { return matrix.cols(); }
};

struct SolverOptions {
  int max_iter = 20000;
  double tol = 1e-8;  // relative duality gap
};

struct SlopeFit {
  Vector beta_hat;
  int iterations = 0;
  double duality_gap = 0.0;
  double objective = 0.0;
  bool converged = false;
  bool kkt_majorization_ok = false;
};

struct ReducedSlopeFit {
  SlopeFit fit;            // beta_hat is lifted to full length (zeros off T)
  bool certificate_ok = false;  // X'_Tbar residual majorized by lambda^{-[|T|]}
};

/// 1/2 ||y - Xb||^2 + J_lambda(b)
double slope_objective(const Design& X, const Vector& y,
                       const WeightVector& lambda, const Vector& b);

/// Primal minus dual objective at the dual-feasible point obtained by
/// rescaling the residual y - Xb into the polytope {nu : X'nu majorized
/// by lambda}. Zero exactly at the optimum.
double duality_gap(const Design& X, const Vector& y,
                   const WeightVector& lambda, const Vector& b);

/// FISTA with function-value adaptive restart; step 1/L with L from
/// power iteration, backtracked if the quadratic upper bound fails.
SlopeFit fit_slope(const Design& X, const Vector& y,
                   const WeightVector& lambda, const SolverOptions& opts = {});

/// SLOPE restricted to columns T with weights lambda^{[|T|]}, plus the
/// lift certificate on the left-out columns.
ReducedSlopeFit fit_reduced_slope(const Design& X, const Vector& y,
                                  const WeightVector& lambda,
                                  const std::vector<Eigen::Index>& T,
                                  const SolverOptions& opts = {});

/// Lasso = SLOPE with constant weights.
SlopeFit lasso_fit(const Design& X, const Vector& y, double lam,
                   const SolverOptions& opts = {});

/// sigma_max(X)^2 via power iteration (30 iterations, x1.01 safety).
double squared_operator_norm(const Design& X);

}  // namespace slope
