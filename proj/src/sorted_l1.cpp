#include "slope/sorted_l1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slope {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw std::invalid_argument("length mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

// Isotonic regression on the already sorted, shifted magnitudes: minimize
// sum (d_i - b_i)^2 subject to b_1 >= b_2 >= ... >= b_p, then clamp at 0.
// Stack of blocks, each carrying its running mean.
void stack_isotonic_clamped(const Vector& d, Vector& out) {
  const Eigen::Index p = d.size();
  std::vector<Eigen::Index> start(p);
  std::vector<double> sum(p), mean(p);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    start[k] = i;
    sum[k] = d[i];
    mean[k] = d[i];
    while (k > 0 && mean[k - 1] <= mean[k]) {
      sum[k - 1] += sum[k];
      mean[k - 1] = sum[k - 1] / double(i - start[k - 1] + 1);
      --k;
    }
    ++k;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index end = (j + 1 < k) ? start[j + 1] : p;
    const double v = std::max(mean[j], 0.0);
    for (Eigen::Index i = start[j]; i < end; ++i) out[i] = v;
  }
}

// Classic PAVA for a nondecreasing fit, written against weighted blocks.
// Used on the reversed data so it solves the nonincreasing problem by a
// genuinely different code path than the stack above.
std::vector<double> pava_nondecreasing(const std::vector<double>& d) {
  const std::size_t p = d.size();
  std::vector<double> value(p), weight(p), fit(p);
  std::vector<std::size_t> len(p);
  std::size_t b = 0;
  for (std::size_t i = 0; i < p; ++i) {
    value[b] = d[i];
    weight[b] = 1.0;
    len[b] = 1;
    while (b > 0 && value[b - 1] > value[b]) {
      value[b - 1] = (weight[b - 1] * value[b - 1] + weight[b] * value[b]) /
                     (weight[b - 1] + weight[b]);
      weight[b - 1] += weight[b];
      len[b - 1] += len[b];
      --b;
    }
    ++b;
  }
  std::size_t pos = 0;
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t i = 0; i < len[j]; ++i) fit[pos++] = value[j];
  }
  return fit;
}

template <typename Kernel>
Vector prox_impl(const Vector& y, const WeightVector& lambda, Kernel kernel) {
  check_lengths(y.size(), lambda.size());
  const Eigen::Index p = y.size();
  const auto perm = magnitude_sort_permutation(y);

  Vector d(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    d[r] = std::abs(y[perm[r]]) - lambda[r];
  }

  Vector fitted(p);
  kernel(d, fitted);

  Vector out(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const Eigen::Index i = perm[r];
    out[i] = std::copysign(fitted[r], y[i]);
    if (fitted[r] == 0.0) out[i] = 0.0;  // no signed zeros
  }
  return out;
}

}  // namespace

WeightVector::WeightVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) {
    throw std::invalid_argument("WeightVector: empty");
  }
  if (values_[0] < 0.0 || !std::isfinite(values_[0])) {
    throw std::invalid_argument("WeightVector: leading entry must be finite and >= 0");
  }
  for (Eigen::Index i = 0; i + 1 < values_.size(); ++i) {
    if (values_[i] < values_[i + 1]) {
      throw std::invalid_argument("WeightVector: not nonincreasing at index " +
                                  std::to_string(i));
    }
  }
  if (values_[values_.size() - 1] < 0.0) {
    throw std::invalid_argument("WeightVector: negative entry");
  }
}

WeightVector WeightVector::head(Eigen::Index m) const {
  if (m < 1 || m > size()) throw std::invalid_argument("head: bad m");
  return WeightVector(values_.head(m));
}

WeightVector WeightVector::drop_largest(Eigen::Index m) const {
  if (m < 0 || m >= size()) throw std::invalid_argument("drop_largest: bad m");
  if (m == 0) return *this;
  return WeightVector(values_.tail(size() - m));
}

WeightVector WeightVector::inflated(double eps) const {
  if (eps < 0.0) throw std::invalid_argument("inflated: eps < 0");
  return scaled(1.0 + eps);
}

WeightVector WeightVector::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scaled: c must be > 0");
  return WeightVector(values_ * c);
}

WeightVector WeightVector::constant(Eigen::Index p, double value) {
  return WeightVector(Vector::Constant(p, value));
}

std::vector<Eigen::Index> magnitude_sort_permutation(const Vector& a) {
  std::vector<Eigen::Index> perm(a.size());
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(a[i]) > std::abs(a[j]);
  });
  return perm;
}

Vector sorted_magnitudes(const Vector& a) {
  Vector m = a.cwiseAbs();
  std::sort(m.data(), m.data() + m.size(), std::greater<double>());
  return m;
}

double sorted_l1_norm(const Vector& b, const WeightVector& lambda) {
  check_lengths(b.size(), lambda.size());
  return sorted_magnitudes(b).dot(lambda.values());
}

bool majorizes(const Vector& a, const Vector& b, double slack) {
  check_lengths(a.size(), b.size());
  const Vector sa = sorted_magnitudes(a);
  const Vector sb = sorted_magnitudes(b);
  double pa = 0.0, pb = 0.0;
  for (Eigen::Index i = 0; i < sa.size(); ++i) {
    pa += sa[i];
    pb += sb[i];
    if (pa + slack < pb) return false;
  }
  return true;
}

Vector prox_sorted_l1(const Vector& y, const WeightVector& lambda) {
  return prox_impl(y, lambda, stack_isotonic_clamped);
}

Vector prox_sorted_l1_pava(const Vector& y, const WeightVector& lambda) {
  return prox_impl(y, lambda, [](const Vector& d, Vector& out) {
    const std::size_t p = std::size_t(d.size());
    std::vector<double> rev(p);
    for (std::size_t i = 0; i < p; ++i) rev[i] = d[Eigen::Index(p - 1 - i)];
    const auto fit = pava_nondecreasing(rev);
    for (std::size_t i = 0; i < p; ++i) {
      out[Eigen::Index(i)] = std::max(fit[p - 1 - i], 0.0);
    }
  });
}

Vector prox_sorted_l1_checked(const Vector& y, const WeightVector& lambda) {
  Vector a = prox_sorted_l1(y, lambda);
  Vector b = prox_sorted_l1_pava(y, lambda);
  if (((a - b).cwiseAbs().maxCoeff()) > 1e-12) {
    throw std::logic_error("prox_sorted_l1: stack and PAVA routes disagree");
  }
  return a;
}

bool prox_norm_bound_holds(const Vector& a, const WeightVector& lambda) {
  check_lengths(a.size(), lambda.size());
  const double lhs = prox_sorted_l1(a, lambda).norm();
  const double rhs =
      (a.cwiseAbs() - lambda.values()).cwiseMax(0.0).norm();
  return lhs <= rhs + 1e-12 * (1.0 + rhs);
}

}  // namespace slope
