#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "localopt/problems.hpp"

using namespace localopt;

TEST_CASE("loss and gradient of an explicit quadratic") {
  Matrix q(2, 2);
  q << 1.0, 0.0, 0.0, 4.0;
  Vector xs(2);
  xs << 1.0, -1.0;
  const QuadraticProblem p = make_quadratic(q, xs);

  Vector x(2);
  x << 2.0, 0.0;
  // f(x) = 0.5 * (1*1 + 4*1) = 2.5, grad = Q (x - x*) = (1, 4).
  CHECK(p.loss(x) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(p.gradient(x)(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.gradient(x)(1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(p.loss(xs) == 0.0);
  CHECK(p.gradient(xs).norm() == 0.0);
  CHECK(p.smoothness == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(p.dim() == 2);
}

TEST_CASE("make_quadratic validates shapes and symmetrizes") {
  Matrix q(2, 3);
  q.setZero();
  CHECK_THROWS_AS(make_quadratic(q, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(Matrix::Identity(3, 3), Vector::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(Matrix(), Vector()), std::invalid_argument);

  Matrix skewed(2, 2);
  skewed << 1.0, 1.0, 0.0, 1.0;  // not symmetric
  const QuadraticProblem p = make_quadratic(skewed, Vector::Zero(2));
  CHECK(p.hessian(0, 1) == doctest::Approx(0.5));
  CHECK(p.hessian(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("random instances are reproducible and well conditioned") {
  const QuadraticProblem a = make_random_quadratic(12, 7);
  const QuadraticProblem b = make_random_quadratic(12, 7);
  CHECK(a.hessian == b.hessian);
  CHECK(a.x_star == b.x_star);
  CHECK(a.smoothness == b.smoothness);

  const QuadraticProblem c = make_random_quadratic(12, 8);
  CHECK(a.hessian != c.hessian);
  CHECK(a.x_star != c.x_star);

  // Symmetric, and every eigenvalue at least the ridge.
  CHECK((a.hessian - a.hessian.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.hessian);
  CHECK(es.eigenvalues().minCoeff() >= kDefaultRidge - 1e-10);
  CHECK(a.smoothness ==
        doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));

  const QuadraticProblem r = make_random_quadratic(12, 7, 2.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es_r(r.hessian);
  CHECK(es_r.eigenvalues().minCoeff() >= 2.0 - 1e-10);
}

TEST_CASE("spectral norm: dense path and power-iteration path agree") {
  // Small matrix goes through the dense eigensolver.
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 0.5, 2.0, 7.25;
  CHECK(spectral_norm_sym(d) == doctest::Approx(7.25).epsilon(1e-12));

  // 250 > 200 forces power iteration; diagonal spectrum is known exactly.
  const int n = 250;
  Matrix big = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    big(i, i) = 1.0 + i;  // top eigenvalue n
  }
  CHECK(spectral_norm_sym(big) == doctest::Approx(double(n)).epsilon(1e-7));

  // Both paths on the same PSD matrix: embed a known random Gram matrix.
  const QuadraticProblem p = make_random_quadratic(40, 3);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.hessian);
  CHECK(spectral_norm_sym(p.hessian) ==
        doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("expected round map: hand example and single-step form") {
  Matrix q = Matrix::Zero(2, 2);
  q.diagonal() << 1.0, 4.0;

  // gamma=2, H=2, eta=0.1: per coordinate 1 - 2 + 2 (1 - 0.1 q)^2.
  const Matrix m = expected_round_map(q, 0.1, 2.0, 2);
  CHECK(m(0, 0) == doctest::Approx(0.62).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(-0.28).epsilon(1e-14));
  CHECK(std::abs(m(0, 1)) < 1e-15);
  CHECK(std::abs(m(1, 0)) < 1e-15);

  // H = 1 collapses to I - gamma eta Q for any gamma.
  const Matrix one = expected_round_map(q, 0.07, 1.5, 1);
  const Matrix expect = Matrix::Identity(2, 2) - 1.5 * 0.07 * q;
  CHECK((one - expect).norm() < 1e-14);

  // Non-diagonal sanity: map commutes with the eigen decomposition.
  const QuadraticProblem p = make_random_quadratic(6, 11);
  const Matrix big = expected_round_map(p.hessian, 0.01, 0.8, 5);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.hessian);
  for (int i = 0; i < 6; ++i) {
    const double lam = es.eigenvalues()(i);
    const double scalar = 1.0 - 0.8 + 0.8 * std::pow(1.0 - 0.01 * lam, 5);
    const Vector v = es.eigenvectors().col(i);
    CHECK((big * v - scalar * v).norm() < 1e-12);
  }
}
