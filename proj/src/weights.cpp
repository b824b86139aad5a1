#include "slope/weights.hpp"

#include <cmath>

namespace slope {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam's piecewise rational approximation; accurate to ~1.15e-9 on its
// own, the Halley refinements below bring it to full double precision.
double acklam_initial(double alpha) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (alpha < p_low) {
    const double u = std::sqrt(-2.0 * std::log(alpha));
    return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
            c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  if (alpha > 1.0 - p_low) {
    const double u = std::sqrt(-2.0 * std::log(1.0 - alpha));
    return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
             c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double u = alpha - 0.5;
  const double r = u * u;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         u /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double halley_step(double x, double alpha) {
  const double err = normal_cdf(x) - alpha;
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  if (pdf <= 0.0) return x;
  const double r = err / pdf;
  return x - r / (1.0 + 0.5 * x * r);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::domain_error("normal_quantile: alpha must lie in (0, 1)");
  }
  // Work in the lower tail: Phi(x) - alpha cancels catastrophically for
  // alpha near 1, while 1 - alpha is exact for alpha in [0.5, 1).
  if (alpha > 0.5) return -normal_quantile(1.0 - alpha);
  double x = acklam_initial(alpha);
  x = halley_step(x, alpha);
  x = halley_step(x, alpha);
  return x;
}

WeightVector bh_weights(double q, Eigen::Index p, double sigma) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::domain_error("bh_weights: q must lie in (0, 1)");
  }
  if (p < 1) throw std::domain_error("bh_weights: p must be >= 1");
  if (!(sigma > 0.0)) throw std::domain_error("bh_weights: sigma must be > 0");
  Vector v(p);
  for (Eigen::Index i = 1; i <= p; ++i) {
    v[i - 1] = sigma * normal_quantile(1.0 - double(i) * q / (2.0 * double(p)));
  }
  return WeightVector(std::move(v));
}

WeightVector sqrtlog_weights(Eigen::Index p, double sigma) {
  if (p < 1) throw std::domain_error("sqrtlog_weights: p must be >= 1");
  if (!(sigma > 0.0)) {
    throw std::domain_error("sqrtlog_weights: sigma must be > 0");
  }
  if (p == 1) {
    // log(1/1) = 0: the schedule degenerates to no shrinkage at all.
    return WeightVector(Vector::Zero(1));
  }
  Vector v(p);
  for (Eigen::Index j = 1; j < p; ++j) {
    v[j - 1] = sigma * std::sqrt(2.0 * std::log(double(p) / double(j)));
  }
  v[p - 1] = 0.0;
  return WeightVector(std::move(v));
}

double weight_energy(const WeightVector& lambda, Eigen::Index k) {
  if (k < 1 || k > lambda.size()) {
    throw std::domain_error("weight_energy: k out of range");
  }
  return lambda.values().head(k).squaredNorm();
}

WeightVector WeightSchedule::materialize() const {
  switch (kind) {
    case WeightKind::Bh:
      return bh_weights(q, p, sigma);
    case WeightKind::InflatedBh:
      return bh_weights(q, p, sigma).inflated(epsilon);
    case WeightKind::SqrtLog:
      return sqrtlog_weights(p, sigma);
  }
  throw std::logic_error("WeightSchedule: unknown kind");
}

}  // namespace slope
