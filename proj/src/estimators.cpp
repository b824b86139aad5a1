#include "slope/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slope {

ThresholdFit fdr_hard_threshold(const Vector& y, double q, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("fdr_hard_threshold: sigma <= 0");
  const Eigen::Index p = y.size();
  const WeightVector crit = bh_weights(q, p, 1.0);
  const Vector mags = sorted_magnitudes(y);

  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (mags[i] / sigma >= crit[i]) r = i + 1;
  }

  ThresholdFit out;
  out.rejections = r;
  if (r == 0) {
    out.threshold = std::numeric_limits<double>::infinity();
    out.beta_hat = Vector::Zero(p);
    return out;
  }
  out.threshold = mags[r - 1];
  out.beta_hat = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(y[i]) >= out.threshold) out.beta_hat[i] = y[i];
  }
  return out;
}

Vector slope_orthogonal(const Vector& y, const WeightVector& lambda) {
  return prox_sorted_l1(y, lambda);
}

Vector sequential_fdr_soft(const Vector& y, double q, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("sequential_fdr_soft: sigma <= 0");
  const Eigen::Index p = y.size();
  const WeightVector crit = bh_weights(q, p, sigma);
  const auto perm = magnitude_sort_permutation(y);
  Vector out(p);
  for (Eigen::Index rank = 0; rank < p; ++rank) {
    const Eigen::Index i = perm[rank];
    const double shrunk = std::max(std::abs(y[i]) - crit[rank], 0.0);
    out[i] = shrunk == 0.0 ? 0.0 : std::copysign(shrunk, y[i]);
  }
  return out;
}

SureFit sure_soft_threshold(const Vector& y, double sigma,
                            const std::vector<double>& grid) {
  if (!(sigma > 0.0)) throw std::domain_error("sure_soft_threshold: sigma <= 0");
  if (grid.empty()) throw std::domain_error("sure_soft_threshold: empty grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] < grid[i + 1])) {
      throw std::domain_error("sure_soft_threshold: grid not strictly increasing");
    }
  }
  const Eigen::Index p = y.size();
  const double s2 = sigma * sigma;

  SureFit out;
  out.grid = grid;
  for (Eigen::Index i = 0; i < p; ++i) out.grid.push_back(std::abs(y[i]));
  std::sort(out.grid.begin(), out.grid.end());
  out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

  auto sure_at = [&](double lam) {
    double acc = double(p) * s2;
    Eigen::Index below = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      acc += std::min(y[i] * y[i], lam * lam);
      if (std::abs(y[i]) <= lam) ++below;
    }
    return acc - 2.0 * s2 * double(below);
  };

  out.sure_values.reserve(out.grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (double lam : out.grid) {
    const double v = sure_at(lam);
    out.sure_values.push_back(v);
    if (v < best) {  // strict: ties keep the smallest lambda
      best = v;
      out.lambda_hat = lam;
    }
  }

  out.beta_hat = Vector(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double shrunk = std::max(std::abs(y[i]) - out.lambda_hat, 0.0);
    out.beta_hat[i] = shrunk == 0.0 ? 0.0 : std::copysign(shrunk, y[i]);
  }
  return out;
}

Vector one_step_oracle(const Design& X, const Vector& z, const Vector& beta,
                       const WeightVector& lambda) {
  if (X.n() != z.size() || X.p() != beta.size() || X.p() != lambda.size()) {
    throw std::invalid_argument("one_step_oracle: dimension mismatch");
  }
  return prox_sorted_l1(beta + X.matrix.transpose() * z, lambda);
}

}  // namespace slope
