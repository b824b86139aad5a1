#include "slope/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slope {
namespace reference {

namespace {

// J_lambda(b) straight from the definition.
double sorted_l1_by_definition(const Vector& b, const WeightVector& lambda) {
  std::vector<double> mags(std::size_t(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) mags[std::size_t(i)] = std::abs(b[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) acc += lambda[i] * mags[std::size_t(i)];
  return acc;
}

// Consecutive block partitions of [0, r): bit i of `mask` set means a new
// block starts at position i + 1.
std::vector<std::vector<Eigen::Index>> block_partitions(Eigen::Index r) {
  std::vector<std::vector<Eigen::Index>> out;
  if (r == 0) {
    out.push_back({});
    return out;
  }
  for (std::uint32_t mask = 0; mask < (1u << (r - 1)); ++mask) {
    std::vector<Eigen::Index> starts{0};
    for (Eigen::Index i = 1; i < r; ++i) {
      if (mask & (1u << (i - 1))) starts.push_back(i);
    }
    out.push_back(std::move(starts));
  }
  return out;
}

}  // namespace

Vector prox_sorted_l1(const Vector& y, const WeightVector& lambda) {
  const Eigen::Index p = y.size();
  if (p != lambda.size()) throw std::invalid_argument("reference prox: lengths");
  if (p > 16) throw std::invalid_argument("reference prox: p too large");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(y[a]) > std::abs(y[b]);
  });

  Vector u(p);
  for (Eigen::Index i = 0; i < p; ++i) u[i] = std::abs(y[perm[std::size_t(i)]]);

  auto assemble = [&](const Vector& mags_sorted) {
    Vector b = Vector::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const Eigen::Index orig = perm[std::size_t(i)];
      b[orig] = y[orig] < 0.0 ? -mags_sorted[i] : mags_sorted[i];
    }
    return b;
  };
  auto objective = [&](const Vector& b) {
    return 0.5 * (y - b).squaredNorm() + sorted_l1_by_definition(b, lambda);
  };

  Vector best = Vector::Zero(p);
  double best_obj = objective(best);
  for (Eigen::Index r = 1; r <= p; ++r) {
    for (const auto& starts : block_partitions(r)) {
      Vector mags = Vector::Zero(p);
      bool ok = true;
      for (std::size_t s = 0; s < starts.size() && ok; ++s) {
        const Eigen::Index lo = starts[s];
        const Eigen::Index hi = (s + 1 < starts.size()) ? starts[s + 1] : r;
        double avg = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i) avg += u[i] - lambda[i];
        avg /= double(hi - lo);
        if (avg <= 0.0) {
          ok = false;
          break;
        }
        for (Eigen::Index i = lo; i < hi; ++i) mags[i] = avg;
      }
      if (!ok) continue;
      const Vector b = assemble(mags);
      const double obj = objective(b);
      if (obj < best_obj) {
        best_obj = obj;
        best = b;
      }
    }
  }
  return best;
}

Vector fit_slope(const Design& X, const Vector& y, const WeightVector& lambda) {
  const Eigen::Index p = X.p();
  if (p != lambda.size() || X.n() != y.size()) {
    throw std::invalid_argument("reference fit: dimensions");
  }
  if (p > 6) throw std::invalid_argument("reference fit: p too large");

  auto objective = [&](const Vector& b) {
    return 0.5 * (y - X.matrix * b).squaredNorm() +
           sorted_l1_by_definition(b, lambda);
  };

  Vector best = Vector::Zero(p);
  double best_obj = objective(best);

  std::vector<Eigen::Index> ranks(static_cast<std::size_t>(p));
  std::iota(ranks.begin(), ranks.end(), Eigen::Index{0});

  // ranks[j] = coordinate holding the j-th largest magnitude.
  do {
    for (std::uint32_t signs = 0; signs < (1u << p); ++signs) {
      for (Eigen::Index r = 1; r <= p; ++r) {
        for (const auto& starts : block_partitions(r)) {
          const Eigen::Index nblocks = Eigen::Index(starts.size());
          // b = M v with one column per block; c = block weight sums.
          Matrix m = Matrix::Zero(p, nblocks);
          Vector c = Vector::Zero(nblocks);
          for (Eigen::Index blk = 0; blk < nblocks; ++blk) {
            const Eigen::Index lo = starts[std::size_t(blk)];
            const Eigen::Index hi =
                (blk + 1 < nblocks) ? starts[std::size_t(blk) + 1] : r;
            for (Eigen::Index j = lo; j < hi; ++j) {
              const Eigen::Index coord = ranks[std::size_t(j)];
              const double s = (signs & (1u << coord)) ? -1.0 : 1.0;
              m(coord, blk) = s;
              c[blk] += lambda[j];
            }
          }
          const Matrix a = X.matrix * m;
          const Matrix gram = a.transpose() * a;
          const Vector rhs = a.transpose() * y - c;
          const Eigen::FullPivLU<Matrix> lu(gram);
          if (!lu.isInvertible()) continue;
          const Vector v = lu.solve(rhs);
          bool feasible = true;
          for (Eigen::Index blk = 0; blk < nblocks && feasible; ++blk) {
            if (v[blk] < -1e-10) feasible = false;
            if (blk + 1 < nblocks && v[blk] + 1e-10 < v[blk + 1]) feasible = false;
          }
          if (!feasible) continue;
          const Vector b = m * v;
          const double obj = objective(b);
          if (obj < best_obj) {
            best_obj = obj;
            best = b;
          }
        }
      }
    }
  } while (std::next_permutation(ranks.begin(), ranks.end()));

  return best;
}

}  // namespace reference
}  // namespace slope
