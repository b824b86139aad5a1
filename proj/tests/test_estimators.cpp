#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slope/estimators.hpp"
#include "slope/rng.hpp"

#include <cmath>

using slope::Design;
using slope::Matrix;
using slope::Vector;
using slope::WeightVector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(Eigen::Index(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vec(slope::Rng& rng, Eigen::Index p, double scale = 2.0) {
  Vector v(p);
  for (Eigen::Index i = 0; i < p; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("fdr hard threshold examples") {
  SUBCASE("single rejection") {
    const slope::ThresholdFit fit =
        slope::fdr_hard_threshold(vec({4, 1, 0.5, 0.2}), 0.2, 1.0);
    CHECK(fit.rejections == 1);
    CHECK(fit.threshold == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(fit.beta_hat == vec({4, 0, 0, 0}));
  }

  SUBCASE("no rejection when everything is small") {
    const slope::ThresholdFit fit =
        slope::fdr_hard_threshold(vec({0.5, -0.3, 0.1}), 0.1, 1.0);
    CHECK(fit.rejections == 0);
    CHECK(std::isinf(fit.threshold));
    CHECK(fit.beta_hat.isZero(0.0));
  }

  SUBCASE("huge entries are all kept") {
    Vector y = Vector::Zero(10);
    y[2] = 50;
    y[5] = -60;
    y[9] = 55;
    const slope::ThresholdFit fit = slope::fdr_hard_threshold(y, 0.1, 1.0);
    CHECK(fit.rejections == 3);
    CHECK(fit.beta_hat[2] == 50);
    CHECK(fit.beta_hat[5] == -60);
    CHECK(fit.beta_hat[9] == 55);
    CHECK(fit.beta_hat.cwiseAbs().sum() == 165);
  }

  CHECK_THROWS_AS(slope::fdr_hard_threshold(vec({1}), 0.1, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(slope::fdr_hard_threshold(vec({1}), 1.5, 1.0),
                  std::domain_error);
}

TEST_CASE("fdr hard threshold equals the p-value step-up rule") {
  slope::Rng rng(41);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(12));
    const double q = 0.05 + 0.3 * rng.uniform();
    const double sigma = 0.5 + rng.uniform();
    const Vector y = random_vec(rng, p, 2.5);
    const slope::ThresholdFit fit = slope::fdr_hard_threshold(y, q, sigma);
    CHECK(fit.rejections == oracles::step_up_rejections(y, q, sigma));
    Eigen::Index nonzero = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (fit.beta_hat[i] != 0.0) {
        ++nonzero;
        CHECK(std::abs(y[i]) >= fit.threshold);
      }
    }
    CHECK(nonzero == fit.rejections);
  }
}

TEST_CASE("slope orthogonal delegates to the prox") {
  const WeightVector l21(vec({2, 1}));
  const Vector a = slope::slope_orthogonal(vec({3.5, -3}), l21);
  CHECK(a[0] == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(-1.75).epsilon(1e-14));
  CHECK(slope::slope_orthogonal(l21.values(), l21).isZero(0.0));
  const Vector b = slope::slope_orthogonal(vec({5, 3}), l21);
  CHECK(b[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("slope support is sandwiched between step-down and step-up") {
  slope::Rng rng(42);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index p = 2 + Eigen::Index(rng.below(11));
    const double q = 0.05 + 0.3 * rng.uniform();
    const Vector y = random_vec(rng, p, 2.5);
    const WeightVector crit = slope::bh_weights(q, p, 1.0);
    const Vector mags = slope::sorted_magnitudes(y);

    // Step-down: reject while every prefix clears the curve.
    Eigen::Index down = 0;
    while (down < p && mags[down] >= crit[down]) ++down;
    // Step-up: last clearing index.
    Eigen::Index up = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (mags[i] >= crit[i]) up = i + 1;
    }

    const Vector fit = slope::slope_orthogonal(y, crit);
    Eigen::Index support = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (fit[i] != 0.0) ++support;
    }
    CHECK(support >= down);
    CHECK(support <= up);
  }
}

TEST_CASE("sequential fdr soft thresholding") {
  CHECK(slope::sequential_fdr_soft(vec({0, 0, 0}), 0.2, 1.0).isZero(0.0));

  // lambda^BH(0.2, p=2) = (Phi^-1(0.95), Phi^-1(0.90)); frozen via the
  // bisection oracle.
  const Vector out = slope::sequential_fdr_soft(vec({4, 1}), 0.2, 1.0);
  CHECK(out[0] == doctest::Approx(2.3551463730485276).epsilon(1e-13));
  CHECK(out[1] == 0.0);  // (1 - 1.2816)_+ = 0

  SUBCASE("permutation equivariance") {
    slope::Rng rng(43);
    const Vector y = random_vec(rng, 6, 2.0);
    const Vector base = slope::sequential_fdr_soft(y, 0.1, 1.0);
    std::vector<Eigen::Index> perm = {5, 2, 0, 4, 1, 3};
    Vector yp(6), expected(6);
    for (Eigen::Index i = 0; i < 6; ++i) {
      yp[i] = y[perm[std::size_t(i)]];
      expected[i] = base[perm[std::size_t(i)]];
    }
    const Vector out_p = slope::sequential_fdr_soft(yp, 0.1, 1.0);
    CHECK((out_p - expected).lpNorm<Eigen::Infinity>() <= 1e-14);
  }

  SUBCASE("rank-wise rule against a direct reimplementation") {
    slope::Rng rng(44);
    for (int t = 0; t < 500; ++t) {
      const Eigen::Index p = 1 + Eigen::Index(rng.below(10));
      const double q = 0.05 + 0.3 * rng.uniform();
      const double sigma = 0.5 + rng.uniform();
      const Vector y = random_vec(rng, p, 2.5);
      const Vector out2 = slope::sequential_fdr_soft(y, q, sigma);
      const auto perm2 = slope::magnitude_sort_permutation(y);
      for (Eigen::Index rank = 0; rank < p; ++rank) {
        const Eigen::Index i = perm2[std::size_t(rank)];
        const double lam = sigma * oracles::quantile_bisect(
            1.0 - double(rank + 1) * q / (2.0 * double(p)));
        const double expect = std::copysign(
            std::max(std::abs(y[i]) - lam, 0.0), y[i]);
        CHECK(out2[i] == doctest::Approx(expect).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("sure soft thresholding") {
  SUBCASE("frozen formula values") {
    const Vector y = vec({3, 1});
    CHECK(oracles::sure_direct(y, 1.0, 0.0) == doctest::Approx(2.0));
    CHECK(oracles::sure_direct(y, 1.0, 2.0) == doctest::Approx(5.0));
    CHECK(oracles::sure_direct(y, 1.0, 10.0) ==
          doctest::Approx(10.0 - 2.0).epsilon(1e-15));  // sum y^2 - p sigma^2
    const slope::SureFit fit = slope::sure_soft_threshold(y, 1.0, {0.0, 2.0});
    for (std::size_t i = 0; i < fit.grid.size(); ++i) {
      CHECK(fit.sure_values[i] ==
            doctest::Approx(oracles::sure_direct(y, 1.0, fit.grid[i]))
                .epsilon(1e-15));
    }
  }

  SUBCASE("closed form equals direct summation everywhere") {
    slope::Rng rng(45);
    for (int t = 0; t < 300; ++t) {
      const Eigen::Index p = 1 + Eigen::Index(rng.below(12));
      const double sigma = 0.5 + rng.uniform();
      const Vector y = random_vec(rng, p, 2.0);
      const slope::SureFit fit =
          slope::sure_soft_threshold(y, sigma, {0.0, 0.5, 1.0, 2.0, 4.0});
      double best = std::numeric_limits<double>::infinity();
      double best_lam = 0.0;
      for (std::size_t i = 0; i < fit.grid.size(); ++i) {
        const double direct = oracles::sure_direct(y, sigma, fit.grid[i]);
        CHECK(fit.sure_values[i] == doctest::Approx(direct).epsilon(1e-13));
        if (direct < best) {
          best = direct;
          best_lam = fit.grid[i];
        }
      }
      CHECK(fit.lambda_hat == best_lam);
      for (Eigen::Index i = 0; i < p; ++i) {
        const double expect = std::copysign(
            std::max(std::abs(y[i]) - fit.lambda_hat, 0.0), y[i]);
        CHECK(fit.beta_hat[i] == doctest::Approx(expect).epsilon(1e-14));
      }
    }
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(slope::sure_soft_threshold(vec({1}), 0.0, {0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(slope::sure_soft_threshold(vec({1}), 1.0, {}),
                    std::domain_error);
    CHECK_THROWS_AS(slope::sure_soft_threshold(vec({1}), 1.0, {1.0, 1.0}),
                    std::domain_error);
  }
}

TEST_CASE("one step oracle") {
  slope::Rng rng(46);

  SUBCASE("zero noise and majorized signal give zero") {
    const Eigen::Index n = 8, p = 4;
    Matrix x(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal() / std::sqrt(n);
    }
    const WeightVector lambda(vec({1.0, 0.8, 0.6, 0.4}));
    const Vector beta = 0.3 * lambda.values();
    const Vector out =
        slope::one_step_oracle(Design{x}, Vector::Zero(n), beta, lambda);
    CHECK(out.isZero(0.0));
  }

  SUBCASE("orthogonal design, zero signal reduces to the prox of X'z") {
    const Eigen::Index p = 6;
    const Design I{Matrix::Identity(p, p)};
    const Vector z = random_vec(rng, p);
    const WeightVector lambda(vec({2, 1.5, 1.2, 0.9, 0.5, 0.2}));
    const Vector out = slope::one_step_oracle(I, z, Vector::Zero(p), lambda);
    CHECK((out - slope::slope_orthogonal(z, lambda)).norm() == 0.0);
  }

  SUBCASE("orthogonal design equals the full solver from any truth") {
    const Eigen::Index p = 6;
    const Design I{Matrix::Identity(p, p)};
    const WeightVector lambda(vec({2, 1.5, 1.2, 0.9, 0.5, 0.2}));
    const Vector beta = random_vec(rng, p, 3.0);
    const Vector z = random_vec(rng, p, 1.0);
    const Vector y = beta + z;
    const Vector one_step = slope::one_step_oracle(I, z, beta, lambda);
    const slope::SlopeFit full = slope::fit_slope(I, y, lambda);
    CHECK((one_step - full.beta_hat).norm() <= 1e-8);
  }

  SUBCASE("near-isometric support implies the approximation bound") {
    // Well-conditioned instance: n much larger than the support.
    const Eigen::Index n = 400, p = 8;
    Matrix x(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal() / std::sqrt(n);
    }
    const Design X{x};
    Vector beta = Vector::Zero(p);
    beta[1] = 8.0;
    beta[5] = -7.0;
    const Vector z = 0.3 * random_vec(rng, n, 1.0);
    const Vector y = x * beta + z;
    const WeightVector lambda =
        slope::bh_weights(0.1, p, 1.0).scaled(0.5);

    const Vector tilde = slope::one_step_oracle(X, z, beta, lambda);
    const slope::SlopeFit full = slope::fit_slope(X, y, lambda);
    REQUIRE(full.converged);

    // Gram eigenvalue premise on the union support.
    std::vector<Eigen::Index> support;
    const double floor = 1e-10 * lambda[0];
    for (Eigen::Index i = 0; i < p; ++i) {
      if (std::abs(beta[i]) > floor || std::abs(tilde[i]) > floor ||
          std::abs(full.beta_hat[i]) > floor) {
        support.push_back(i);
      }
    }
    Matrix sub(n, Eigen::Index(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) {
      sub.col(Eigen::Index(j)) = x.col(support[j]);
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sub.transpose() * sub);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    const double delta = std::max(1.0 - lo, hi - 1.0);
    REQUIRE(delta < 0.4);  // premise: eigenvalues in [1 - delta, 1 + delta]

    const double bound = std::sqrt(3.0 * delta / (1.0 - 2.0 * delta)) *
                         (tilde - beta).norm();
    CHECK((tilde - full.beta_hat).norm() <= bound + 1e-6);
  }

  CHECK_THROWS_AS(
      slope::one_step_oracle(Design{Matrix::Identity(3, 3)}, Vector::Zero(2),
                             Vector::Zero(3), WeightVector(vec({1, 1, 1}))),
      std::invalid_argument);
}
