//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fdbn/datagen.h"
#include "fdbn/errors.h"
#include "fdbn/numkit.h"
#include "oracles.hpp"

using namespace fdbn;

TEST_SUITE("numkit") {

TEST_CASE("expm of zero is identity") {
  CHECK(matrix_exponential(Mat::Zero(3, 3)).isApprox(Mat::Identity(3, 3)));
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 2;
  const Mat e = matrix_exponential(m);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(e(0, 1) == 0.0);
  CHECK(e(1, 0) == 0.0);
}

TEST_CASE("expm trace of the swap matrix matches the series") {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  const double tr = matrix_exponential(m).trace();
  CHECK(tr == doctest::Approx(oracle::series_expm(m, 30).trace()).epsilon(1e-13));
  CHECK(tr == doctest::Approx(2 * std::cosh(1.0)).epsilon(1e-13));
  CHECK(tr == doctest::Approx(3.086161).epsilon(1e-6));
}

TEST_CASE("expm agrees with the power series on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 7;
    const Mat m = oracle::random_matrix(rng, d, d, -1.5, 1.5);
    const Mat ref = oracle::series_expm(m);
    CHECK((matrix_exponential(m) - ref).norm() <= 1e-12 * ref.norm());
  }
}

TEST_CASE("expm of a nilpotent matrix equals its finite series") {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 8; ++d) {
    Mat n = oracle::random_matrix(rng, d, d).triangularView<Eigen::StrictlyLower>();
    Mat sum = Mat::Identity(d, d), term = Mat::Identity(d, d);
    for (int k = 1; k < d; ++k) {
      term = term * n / k;
      sum += term;
    }
    CHECK((matrix_exponential(n) - sum).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("expm rejects bad input") {
  CHECK_THROWS_AS(matrix_exponential(Mat::Zero(2, 3)), DimensionError);
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(matrix_exponential(m), NumericError);
  CHECK_THROWS_AS(matrix_exponential(Mat::Constant(3, 3, 1e6)), NumericError);
}

TEST_CASE("acyclicity vanishes on strictly lower triangular W") {
  std::mt19937_64 rng(3);
  for (int d = 2; d <= 8; ++d) {
    Mat w = oracle::random_matrix(rng, d, d).triangularView<Eigen::StrictlyLower>();
    CHECK(std::abs(acyclicity(w).value) <= 1e-14);
    CHECK(acyclicity_value(w) == doctest::Approx(acyclicity(w).value));
  }
}

TEST_CASE("acyclicity of a two-cycle") {
  Mat w(2, 2);
  w << 0, 1, 1, 0;
  const double h = acyclicity(w).value;
  CHECK(h == doctest::Approx(oracle::series_acyclicity(w)).epsilon(1e-13));
  CHECK(h == doctest::Approx(2 * std::cosh(1.0) - 2).epsilon(1e-13));
  CHECK(h == doctest::Approx(1.086161).epsilon(1e-6));
}

TEST_CASE("acyclicity gradient at zero is zero") {
  CHECK(acyclicity(Mat::Zero(4, 4)).gradient.isZero(0));
}

TEST_CASE("acyclicity is zero exactly on DAGs") {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution edge(0.25);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 3 + trial % 6;
    Mat w = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j && edge(rng))
          w(i, j) = 0.5;
    const double h = acyclicity(w).value;
    CHECK(h >= -1e-12);
    if (oracle::dfs_acyclic(w))
      CHECK(h <= 1e-12);
    else
      CHECK(h > 1e-3);
  }
}

TEST_CASE("acyclicity gradient matches central differences") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 7;
    const Mat w = oracle::random_matrix(rng, d, d);
    const Mat g = acyclicity(w).gradient;
    const Mat fd = oracle::fd_gradient(
        [](const Mat &x) { return acyclicity_value(x); }, w, 1e-5);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double err = std::abs(g(i, j) - fd(i, j));
        if (std::abs(fd(i, j)) < 1e-3)
          CHECK(err <= 1e-8);
        else
          CHECK(err <= 1e-5 * std::abs(fd(i, j)));
      }
  }
}

TEST_CASE("spd_solve trivial systems") {
  const Mat b = Mat::Random(3, 2);
  CHECK(spd_solve(Mat::Identity(3, 3), b).isApprox(b));
  Mat p = Mat::Zero(2, 2);
  p(0, 0) = 2;
  p(1, 1) = 4;
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 0.5;
  expect(1, 1) = 0.25;
  CHECK((spd_solve(p, Mat::Identity(2, 2)) - expect).norm() <= 1e-15);
}

TEST_CASE("spd_solve residual on random SPD systems") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat g = oracle::random_normal(rng, 5, 5);
    const Mat p = g.transpose() * g + Mat::Identity(5, 5);
    const Mat b = oracle::random_normal(rng, 5, 3);
    const Mat x = spd_solve(p, b);
    CHECK((p * x - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("spd_solve names the failing pivot") {
  Mat p(2, 2);
  p << 1, 2, 2, 1;
  try {
    spd_solve(p, Mat::Identity(2, 2));
    FAIL("expected NumericError");
  } catch (const NumericError &e) {
    CHECK(std::string(e.what()).find("pivot 1") != std::string::npos);
  }
  CHECK_THROWS_AS(spd_solve(Mat::Identity(2, 2), Mat::Zero(3, 1)),
                  DimensionError);
}

namespace {
  ObjectiveFn shifted_square(const Vec &c) {
    return [c](const Vec &x, Vec &g) {
      g = 2 * (x - c);
      return (x - c).squaredNorm();
    };
  }
}  // namespace

TEST_CASE("bound_minimize interior minimum") {
  Vec c(3);
  c << 0.5, 2, 0;
  const auto r = bound_minimize(shifted_square(c), Vec::Zero(3), Vec::Zero(3));
  CHECK(r.converged);
  CHECK((r.x - c).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("bound_minimize projects onto the orthant") {
  Vec c(2);
  c << -1, 2;
  const auto r = bound_minimize(shifted_square(c), Vec::Zero(2), Vec::Zero(2));
  CHECK(r.converged);
  CHECK(r.x(0) == 0.0);
  CHECK(r.x(1) == doctest::Approx(2).epsilon(1e-8));
}

TEST_CASE("bound_minimize matches a projected-gradient oracle on a QP") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat g = oracle::random_normal(rng, 10, 10);
    const Mat q = g.transpose() * g / 10 + 0.5 * Mat::Identity(10, 10);
    const Vec b = oracle::random_normal(rng, 10, 1);
    const Vec ref = oracle::projected_gradient_qp(q, b, 100000);
    auto f = [&](const Vec &x, Vec &grad) {
      grad = q * x - b;
      return 0.5 * x.dot(q * x) - b.dot(x);
    };
    BoundMinimizeConfig cfg;
    cfg.grad_tol = 1e-10;
    const auto r = bound_minimize(f, Vec::Zero(10), Vec::Zero(10), cfg);
    CHECK(r.converged);
    CHECK((r.x - ref).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("bound_minimize respects bounds and never increases the objective") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const Vec c = oracle::random_normal(rng, n, 1);
    const Vec lo = oracle::random_matrix(rng, n, 1, -0.5, 0.5);
    Vec x0 = lo + oracle::random_matrix(rng, n, 1, 0, 1);
    // Rosenbrock-like coupling makes the problem nonconvex.
    auto f = [&](const Vec &x, Vec &g) {
      double v = (x - c).squaredNorm();
      g = 2 * (x - c);
      for (int i = 0; i + 1 < n; ++i) {
        const double r = x(i + 1) - x(i) * x(i);
        v += 5 * r * r;
        g(i + 1) += 10 * r;
        g(i) -= 20 * r * x(i);
      }
      return v;
    };
    Vec g0(n);
    const double f0 = f(x0, g0);
    const auto r = bound_minimize(f, x0, lo);
    CHECK((r.x - lo).minCoeff() >= 0.0);
    CHECK(r.objective <= f0);
    if (r.converged)
      CHECK(r.projected_gradient_norm <= 1e-6);
  }
}

TEST_CASE("bound_minimize with unbounded coordinates") {
  Vec c(2);
  c << -3, 4;
  const Vec lo = Vec::Constant(2, -std::numeric_limits<double>::infinity());
  const auto r = bound_minimize(shifted_square(c), Vec::Zero(2), lo);
  CHECK((r.x - c).norm() <= 1e-8);
}

TEST_CASE("bound_minimize stops on a non-finite callback") {
  int calls = 0;
  auto f = [&](const Vec &x, Vec &g) {
    g = 2 * x;
    return ++calls > 1 ? std::numeric_limits<double>::quiet_NaN()
                       : x.squaredNorm();
  };
  Vec x0(1);
  x0 << 1;
  const auto r = bound_minimize(f, x0, Vec::Constant(1, -10));
  CHECK_FALSE(r.converged);
  CHECK(std::isfinite(r.objective));
  CHECK(r.x(0) == 1.0);
}

TEST_CASE("bound_minimize rejects mismatched bounds") {
  CHECK_THROWS_AS(bound_minimize(shifted_square(Vec::Zero(2)), Vec::Zero(2),
                                 Vec::Zero(3)),
                  DimensionError);
}

}  // TEST_SUITE
