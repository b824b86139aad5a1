#include "slope/solver.hpp"

#include <algorithm>
#include <cmath>

namespace slope {

namespace {

void check_dims(const Design& X, const Vector& y, const WeightVector& lambda) {
  if (X.n() != y.size()) {
    throw std::invalid_argument("design has " + std::to_string(X.n()) +
                                " rows but y has " + std::to_string(y.size()));
  }
  if (X.p() != lambda.size()) {
    throw std::invalid_argument("design has " + std::to_string(X.p()) +
                                " columns but lambda has " +
                                std::to_string(lambda.size()));
  }
  if (!X.matrix.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite entries in X or y");
  }
}

// Largest t in (0, 1] such that t * g lies in the dual polytope, i.e.
// t * g is majorized by lambda; t is the minimum of the prefix-sum ratios.
double dual_feasible_scale(const Vector& g, const WeightVector& lambda) {
  const Vector sg = sorted_magnitudes(g);
  double t = 1.0;
  double pg = 0.0, pl = 0.0;
  for (Eigen::Index i = 0; i < sg.size(); ++i) {
    pg += sg[i];
    pl += lambda[i];
    if (pg > 0.0) t = std::min(t, pl / pg);
  }
  return std::max(t, 0.0);
}

}  // namespace

double slope_objective(const Design& X, const Vector& y,
                       const WeightVector& lambda, const Vector& b) {
  return 0.5 * (y - X.matrix * b).squaredNorm() + sorted_l1_norm(b, lambda);
}

double duality_gap(const Design& X, const Vector& y,
                   const WeightVector& lambda, const Vector& b) {
  check_dims(X, y, lambda);
  const Vector r = y - X.matrix * b;
  const Vector g = X.matrix.transpose() * r;
  const double primal = 0.5 * r.squaredNorm() + sorted_l1_norm(b, lambda);
  const double t = dual_feasible_scale(g, lambda);
  const Vector nu = t * r;
  const double dual = nu.dot(y) - 0.5 * nu.squaredNorm();
  return primal - dual;
}

double squared_operator_norm(const Design& X) {
  const Eigen::Index p = X.p();
  Vector v = Vector::Ones(p) / std::sqrt(double(p));
  double l = 0.0;
  for (int it = 0; it < 30; ++it) {
    Vector w = X.matrix.transpose() * (X.matrix * v);
    l = w.norm();
    if (l <= 0.0) return 0.0;
    v = w / l;
  }
  return l * 1.01;
}

SlopeFit fit_slope(const Design& X, const Vector& y,
                   const WeightVector& lambda, const SolverOptions& opts) {
  check_dims(X, y, lambda);
  if (opts.max_iter < 1 || !(opts.tol > 0.0)) {
    throw std::invalid_argument("fit_slope: bad solver options");
  }
  const Eigen::Index p = X.p();

  SlopeFit out;
  out.beta_hat = Vector::Zero(p);

  const double lip = squared_operator_norm(X);
  if (lip <= 0.0) {
    // X = 0: the objective is minimized exactly at b = 0.
    out.objective = 0.5 * y.squaredNorm();
    out.converged = true;
    out.kkt_majorization_ok = true;
    return out;
  }

  double step = 1.0 / lip;
  const int check_every = 10;

  Vector b = Vector::Zero(p);
  Vector xb = Vector::Zero(X.n());
  Vector v = b;
  Vector xv = xb;
  double theta = 1.0;
  double obj = 0.5 * y.squaredNorm();

  auto smooth = [&](const Vector& xw) { return 0.5 * (y - xw).squaredNorm(); };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const Vector grad = X.matrix.transpose() * (xv - y);
    const double f_v = smooth(xv);

    Vector b_new, xb_new;
    double f_new;
    for (;;) {
      b_new = prox_sorted_l1(v - step * grad, lambda.scaled(step));
      xb_new = X.matrix * b_new;
      f_new = smooth(xb_new);
      const Vector diff = b_new - v;
      const double bound =
          f_v + grad.dot(diff) + 0.5 / step * diff.squaredNorm();
      if (f_new <= bound + 1e-12 * std::abs(bound)) break;
      step *= 0.5;
    }
    double obj_new = f_new + sorted_l1_norm(b_new, lambda);

    if (obj_new > obj) {
      // Momentum overshot; restart from the last iterate.
      theta = 1.0;
      const Vector grad_b = X.matrix.transpose() * (xb - y);
      for (;;) {
        b_new = prox_sorted_l1(b - step * grad_b, lambda.scaled(step));
        xb_new = X.matrix * b_new;
        f_new = smooth(xb_new);
        const Vector diff = b_new - b;
        const double bound = smooth(xb) + grad_b.dot(diff) +
                             0.5 / step * diff.squaredNorm();
        if (f_new <= bound + 1e-12 * std::abs(bound)) break;
        step *= 0.5;
      }
      obj_new = f_new + sorted_l1_norm(b_new, lambda);
    }

    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double mom = (theta - 1.0) / theta_new;
    v = b_new + mom * (b_new - b);
    xv = xb_new + mom * (xb_new - xb);
    theta = theta_new;

    b = b_new;
    xb = xb_new;
    obj = obj_new;

    if ((iter + 1) % check_every == 0 || iter + 1 == opts.max_iter) {
      const double gap = duality_gap(X, y, lambda, b);
      if (gap <= opts.tol * std::max(1.0, obj)) {
        out.converged = true;
        // Also insist on the advertised dual-feasibility certificate; the
        // gap alone can be met while the residual correlations still poke
        // past lambda by more than the slack. Skip when lambda_1 = 0: the
        // slack degenerates and only an exact solve could satisfy it.
        if (lambda[0] == 0.0 ||
            majorizes(lambda.values(), X.matrix.transpose() * (y - xb),
                      1e-6 * lambda[0])) {
          break;
        }
      }
    }
  }

  out.beta_hat = b;
  out.iterations = std::min(iter + 1, opts.max_iter);
  out.objective = obj;
  out.duality_gap = duality_gap(X, y, lambda, b);
  const Vector resid_corr = X.matrix.transpose() * (y - xb);
  out.kkt_majorization_ok =
      majorizes(lambda.values(), resid_corr, 1e-6 * lambda[0]);
  return out;
}

ReducedSlopeFit fit_reduced_slope(const Design& X, const Vector& y,
                                  const WeightVector& lambda,
                                  const std::vector<Eigen::Index>& T,
                                  const SolverOptions& opts) {
  check_dims(X, y, lambda);
  if (T.empty()) throw std::invalid_argument("fit_reduced_slope: empty T");
  const Eigen::Index p = X.p();
  const Eigen::Index m = Eigen::Index(T.size());
  if (m > p) throw std::invalid_argument("fit_reduced_slope: |T| > p");
  for (Eigen::Index i : T) {
    if (i < 0 || i >= p) {
      throw std::invalid_argument("fit_reduced_slope: index out of range");
    }
  }

  Design xt{Matrix(X.n(), m)};
  for (Eigen::Index j = 0; j < m; ++j) xt.matrix.col(j) = X.matrix.col(T[j]);

  SlopeFit reduced = fit_slope(xt, y, lambda.head(m), opts);

  ReducedSlopeFit out;
  out.fit = reduced;
  out.fit.beta_hat = Vector::Zero(p);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.fit.beta_hat[T[j]] = reduced.beta_hat[j];
  }

  if (m == p) {
    out.certificate_ok = true;
    return out;
  }

  const Vector resid = y - xt.matrix * reduced.beta_hat;
  std::vector<bool> in_t(std::size_t(p), false);
  for (Eigen::Index i : T) in_t[std::size_t(i)] = true;
  Vector off_corr(p - m);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!in_t[std::size_t(i)]) off_corr[pos++] = X.matrix.col(i).dot(resid);
  }
  out.certificate_ok = majorizes(lambda.drop_largest(m).values(), off_corr,
                                 1e-6 * lambda[0]);
  return out;
}

SlopeFit lasso_fit(const Design& X, const Vector& y, double lam,
                   const SolverOptions& opts) {
  if (!(lam > 0.0)) throw std::invalid_argument("lasso_fit: lambda must be > 0");
  return fit_slope(X, y, WeightVector::constant(X.p(), lam), opts);
}

}  // namespace slope
