#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fedchain/rng.hpp"
#include "fedchain/vec.hpp"

using namespace fedchain;

TEST_CASE("axpy basic arithmetic") {
  Vector x(2), y(2);
  x << 5.0, -7.0;
  y << 1.0, 2.0;
  CHECK(axpy(0.0, x, y) == y);

  Vector ones(2), minus(2);
  ones << 1.0, 1.0;
  minus << -1.0, -1.0;
  CHECK(axpy(1.0, ones, minus).norm() == 0.0);

  Vector e1(2), b(2);
  e1 << 1.0, 0.0;
  b << 0.0, 3.0;
  const Vector r = axpy(2.0, e1, b);
  CHECK(r[0] == 2.0);
  CHECK(r[1] == 3.0);
}

TEST_CASE("axpy rejects dimension mismatch") {
  Vector x(2), y(3);
  x.setZero();
  y.setZero();
  CHECK_THROWS_AS(axpy(1.0, x, y), std::invalid_argument);
}

TEST_CASE("axpy composition identity") {
  // axpy(a, x, axpy(b, x, y)) == axpy(a+b, x, y) to 1e-12 relative
  for (int trial = 0; trial < 50; ++trial) {
    RngStream s(42, trial, 0, 0, Purpose::kMisc);
    const Vector x = gaussian(s, 8);
    RngStream s2(43, trial, 0, 0, Purpose::kMisc);
    const Vector y = gaussian(s2, 8);
    const double a = uniform01(s, 100) * 4 - 2;
    const double b = uniform01(s, 101) * 4 - 2;
    const Vector lhs = axpy(a, x, axpy(b, x, y));
    const Vector rhs = axpy(a + b, x, y);
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("gaussian draws are deterministic in the key") {
  RngStream s(123, 4, 5, 6, Purpose::kGradNoise);
  const Vector a = gaussian(s, 17);
  const Vector b = gaussian(s, 17);
  CHECK(a == b);
  CHECK(normal(s, 3) == normal(s, 3));
  // distinct stream ids change the draws
  RngStream t(123, 4, 5, 7, Purpose::kGradNoise);
  CHECK(gaussian(t, 17) != a);
  RngStream u(124, 4, 5, 6, Purpose::kGradNoise);
  CHECK(gaussian(u, 17) != a);
}

TEST_CASE("gaussian moments at 1e6 draws") {
  RngStream s(7, 0, 0, 0, Purpose::kMisc);
  const int n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = normal(s, i);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var > 0.99);
  CHECK(var < 1.01);
}

TEST_CASE("distinct streams are uncorrelated") {
  RngStream a(99, 1, 0, 0, Purpose::kMisc);
  RngStream b(99, 2, 0, 0, Purpose::kMisc);
  const int n = 100'000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = normal(a, i), y = normal(b, i);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx / n * (sx / n)) *
                                      (syy / n - sy / n * (sy / n)));
  CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("uniform_below stays in range and covers it") {
  RngStream s(5, 0, 0, 0, Purpose::kMisc);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = uniform_below(s, i, 7);
    REQUIRE(v < 7);
    counts[v]++;
  }
  for (int c : counts) CHECK(c > 700);  // ~1000 each
}
