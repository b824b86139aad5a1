#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slope/rng.hpp"
#include "slope/weights.hpp"

#include <cmath>

using slope::WeightVector;

TEST_CASE("normal quantile frozen values") {
  CHECK(slope::normal_quantile(0.5) == 0.0);
  // Bisection on an erfc-based CDF, frozen to 17 digits.
  CHECK(slope::normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(slope::normal_quantile(0.9875) ==
        doctest::Approx(2.2414027276049469).epsilon(1e-14));
  CHECK(slope::normal_quantile(0.95) ==
        doctest::Approx(1.6448536269514722).epsilon(1e-14));
  CHECK_THROWS_AS(slope::normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(slope::normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(slope::normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("normal quantile vs bisection oracle across the range") {
  for (double a : {1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5, 0.7, 0.99, 0.9999,
                   1.0 - 1e-10}) {
    const double x = slope::normal_quantile(a);
    const double ref = oracles::quantile_bisect(a);
    const double scale = std::max(std::abs(ref), 1.0);
    CHECK(std::abs(x - ref) <= 1e-13 * scale);
  }
}

TEST_CASE("normal quantile deep tail is finite and consistent") {
  // Round-trip through the CDF where it is representable.
  for (double a : {1e-300, 1e-200, 1e-100, 1e-50, 1e-20}) {
    const double x = slope::normal_quantile(a);
    CHECK(std::isfinite(x));
    CHECK(x < 0.0);
    const double back = slope::normal_cdf(x);
    // In CDF space an x-error of one ulp is amplified by |x|, so allow a
    // slightly wider relative band here than the x-space contract.
    CHECK(std::abs(back - a) <= 1e-11 * a);
  }
  CHECK(std::isfinite(slope::normal_quantile(1.0 - 1e-16)));
}

TEST_CASE("normal quantile symmetry") {
  slope::Rng rng(12);
  for (int t = 0; t < 2000; ++t) {
    const double a = rng.uniform();
    const double plus = slope::normal_quantile(a);
    const double minus = slope::normal_quantile(1.0 - a);
    CHECK(std::abs(plus + minus) <= 1e-12 * std::max(1.0, std::abs(plus)));
  }
}

TEST_CASE("bh weights examples") {
  const WeightVector w = slope::bh_weights(0.2, 4, 1.0);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(1.9600).epsilon(5e-5));
  CHECK(w[1] == doctest::Approx(1.6449).epsilon(5e-5));
  CHECK(w[2] == doctest::Approx(1.4395).epsilon(5e-5));
  CHECK(w[3] == doctest::Approx(1.2816).epsilon(5e-5));

  const WeightVector w2 = slope::bh_weights(0.05, 2, 2.0);
  CHECK(w2[0] == doctest::Approx(4.4828054552098937).epsilon(1e-13));

  CHECK_THROWS_AS(slope::bh_weights(0.0, 4, 1.0), std::domain_error);
  CHECK_THROWS_AS(slope::bh_weights(1.0, 4, 1.0), std::domain_error);
  CHECK_THROWS_AS(slope::bh_weights(0.1, 0, 1.0), std::domain_error);
  CHECK_THROWS_AS(slope::bh_weights(0.1, 4, 0.0), std::domain_error);
}

TEST_CASE("bh weights monotone in parameters") {
  for (Eigen::Index p : {1, 2, 7, 50}) {
    const WeightVector w = slope::bh_weights(0.1, p, 1.0);
    for (Eigen::Index i = 0; i + 1 < p; ++i) CHECK(w[i] > w[i + 1]);
    // increasing in sigma
    const WeightVector ws = slope::bh_weights(0.1, p, 2.0);
    for (Eigen::Index i = 0; i < p; ++i) {
      CHECK(ws[i] == doctest::Approx(2.0 * w[i]).epsilon(1e-14));
    }
    // pointwise decreasing in q
    const WeightVector wq = slope::bh_weights(0.2, p, 1.0);
    for (Eigen::Index i = 0; i < p; ++i) CHECK(wq[i] < w[i]);
  }
}

TEST_CASE("sqrtlog weights") {
  const WeightVector w1 = slope::sqrtlog_weights(1, 1.0);
  REQUIRE(w1.size() == 1);
  CHECK(w1[0] == 0.0);

  const WeightVector w4 = slope::sqrtlog_weights(4, 1.0);
  CHECK(w4[0] == doctest::Approx(std::sqrt(2.0 * std::log(4.0))).epsilon(1e-15));
  CHECK(w4[1] == doctest::Approx(std::sqrt(2.0 * std::log(2.0))).epsilon(1e-15));
  CHECK(w4[2] ==
        doctest::Approx(std::sqrt(2.0 * std::log(4.0 / 3.0))).epsilon(1e-15));
  CHECK(w4[3] == 0.0);

  const WeightVector w10 = slope::sqrtlog_weights(10, 3.0);
  CHECK(w10[0] == doctest::Approx(6.4378980788680416).epsilon(1e-13));
  CHECK(w10[9] == 0.0);
  for (Eigen::Index i = 0; i + 1 < 10; ++i) CHECK(w10[i] >= w10[i + 1]);
}

TEST_CASE("weight energy") {
  CHECK(slope::weight_energy(WeightVector(slope::Vector(
            (slope::Vector(2) << 2, 1).finished())), 2) ==
        doctest::Approx(5.0).epsilon(1e-15));
  const WeightVector bh = slope::bh_weights(0.1, 8, 1.0);
  CHECK(slope::weight_energy(bh, 1) ==
        doctest::Approx(bh[0] * bh[0]).epsilon(1e-15));
  CHECK_THROWS_AS(slope::weight_energy(bh, 0), std::domain_error);
  CHECK_THROWS_AS(slope::weight_energy(bh, 9), std::domain_error);
}

TEST_CASE("bh weight energy tracks 2k log(p/k) as p grows") {
  const Eigen::Index k = 10;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index p : {1000, 10000, 100000, 1000000}) {
    const WeightVector w = slope::bh_weights(0.1, p, 1.0);
    const double ratio =
        slope::weight_energy(w, k) / (2.0 * double(k) * std::log(double(p) / double(k)));
    const double gap = std::abs(ratio - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    if (p == 1000000) CHECK((ratio >= 0.9 && ratio <= 1.2));
  }
}

TEST_CASE("weight schedule materialization") {
  slope::WeightSchedule s;
  s.kind = slope::WeightKind::Bh;
  s.q = 0.2;
  s.p = 4;
  s.sigma = 1.0;
  const WeightVector base = s.materialize();
  CHECK(base[0] == doctest::Approx(1.959963984540054).epsilon(1e-13));

  s.kind = slope::WeightKind::InflatedBh;
  s.epsilon = 0.1;
  const WeightVector infl = s.materialize();
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(infl[i] == doctest::Approx(1.1 * base[i]).epsilon(1e-14));
  }

  s.kind = slope::WeightKind::SqrtLog;
  const WeightVector sq = s.materialize();
  CHECK(sq[3] == 0.0);
}
