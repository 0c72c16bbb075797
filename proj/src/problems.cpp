#include "localopt/problems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace localopt {

double QuadraticProblem::loss(const Vector& x) const {
  const Vector z = x - x_star;
  return 0.5 * z.dot(hessian * z);
}

Vector QuadraticProblem::gradient(const Vector& x) const {
  return hessian * (x - x_star);
}

QuadraticProblem make_quadratic(Matrix hessian, Vector x_star) {
  if (x_star.size() == 0) {
    throw std::invalid_argument("problem dimension must be at least 1");
  }
  if (hessian.rows() != hessian.cols() || hessian.rows() != x_star.size()) {
    throw std::invalid_argument("hessian shape does not match minimizer");
  }
  QuadraticProblem p;
  p.hessian = 0.5 * (hessian + hessian.transpose());
  p.x_star = std::move(x_star);
  p.smoothness = spectral_norm_sym(p.hessian);
  return p;
}

QuadraticProblem make_random_quadratic(int dim, std::uint64_t seed,
                                       double ridge) {
  if (dim < 1) {
    throw std::invalid_argument("problem dimension must be at least 1");
  }
  if (ridge < 0.0) {
    throw std::invalid_argument("ridge must be non-negative");
  }
  RngStream mat_stream = RngStream::keyed(seed, rng_tag::kMatrix);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = mat_stream.normal();
    }
  }
  RngStream opt_stream = RngStream::keyed(seed, rng_tag::kOptimum);
  Vector x_star(dim);
  for (int i = 0; i < dim; ++i) {
    x_star[i] = opt_stream.normal();
  }
  Matrix q = a.transpose() * a;
  q.diagonal().array() += ridge;
  return make_quadratic(std::move(q), std::move(x_star));
}

double spectral_norm_sym(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) {
    throw std::invalid_argument("matrix must be non-empty");
  }
  if (n <= 200) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().maxCoeff();
  }
  // Power iteration with a fixed keyed start vector so results do not depend
  // on call order or threading.
  RngStream stream = RngStream::keyed(0, rng_tag::kPowerIter);
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = stream.normal();
  }
  v.normalize();
  double lambda = 0.0;
  constexpr double kTol = 1e-10;
  constexpr int kMaxIters = 10000;
  for (int it = 0; it < kMaxIters; ++it) {
    Vector mv = m * v;
    const double norm = mv.norm();
    if (norm == 0.0) {
      return 0.0;
    }
    v = mv / norm;
    const double next = v.dot(m * v);
    if (std::abs(next - lambda) <= kTol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

Vector gaussian_noise(int dim, double sigma, NoiseScaling scaling,
                      RngStream& stream) {
  if (dim < 1) {
    throw std::invalid_argument("noise dimension must be at least 1");
  }
  if (sigma < 0.0) {
    throw std::invalid_argument("sigma must be non-negative");
  }
  if (sigma == 0.0) {
    return Vector::Zero(dim);
  }
  const double scale =
      scaling == NoiseScaling::kTotal ? sigma / std::sqrt(double(dim)) : sigma;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = scale * stream.normal();
  }
  return v;
}

Matrix expected_round_map(const Matrix& hessian, double eta, double gamma,
                          int local_steps) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0) {
    throw std::invalid_argument("hessian must be square and non-empty");
  }
  if (local_steps < 1) {
    throw std::invalid_argument("local_steps must be at least 1");
  }
  const int n = static_cast<int>(hessian.rows());
  Matrix base = Matrix::Identity(n, n) - eta * hessian;
  // Binary exponentiation keeps this cheap even for very long rounds.
  Matrix pow = Matrix::Identity(n, n);
  int e = local_steps;
  while (e > 0) {
    if (e & 1) {
      pow = pow * base;
    }
    e >>= 1;
    if (e > 0) {
      base = base * base;
    }
  }
  return (1.0 - gamma) * Matrix::Identity(n, n) + gamma * pow;
}

}  // namespace localopt
