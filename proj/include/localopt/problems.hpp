#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "localopt/rng.hpp"

namespace localopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Ridge added to the Gram matrix in make_random_quadratic. Keeps the smallest
// curvature bounded away from zero so every coordinate of a random instance
// actually converges at a rate visible within a few hundred rounds, while
// still leaving the slowest mode slow enough that the outer-stepsize /
// noise-level phase diagram shows its optimization-dominated regime on the
// reference grids (gamma near 1 optimal through sigma = 1e-2).
inline constexpr double kDefaultRidge = 0.2;

// Convex quadratic f(x) = 0.5 (x - x*)^T Q (x - x*), minimum value 0 at x*.
struct QuadraticProblem {
  Matrix hessian;        // symmetric positive semi-definite
  Vector x_star;         // minimizer
  double smoothness = 0; // largest eigenvalue of hessian, cached

  int dim() const { return static_cast<int>(x_star.size()); }
  double loss(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

// Wraps an explicit Hessian/minimizer pair. The Hessian is symmetrized and
// its largest eigenvalue cached. Throws std::invalid_argument on shape
// mismatch or empty dimension.
QuadraticProblem make_quadratic(Matrix hessian, Vector x_star);

// Random instance: Q = A^T A + ridge I with A entries i.i.d. standard normal
// (drawn row-major), x* standard normal. Both depend only on (dim, seed).
QuadraticProblem make_random_quadratic(int dim, std::uint64_t seed,
                                       double ridge = kDefaultRidge);

// Largest eigenvalue of a symmetric PSD matrix. Dense eigensolver up to
// dimension 200; power iteration above that (relative tolerance 1e-10,
// at most 10000 iterations, deterministic start vector).
double spectral_norm_sym(const Matrix& m);

// How a scalar noise level maps onto coordinates of the perturbation vector.
//   kTotal:    per-coordinate stddev sigma/sqrt(dim), so E||v||^2 = sigma^2
//              regardless of dimension.
//   kPerCoord: per-coordinate stddev sigma, so E||v||^2 = dim * sigma^2.
enum class NoiseScaling { kTotal, kPerCoord };

// Zero-mean Gaussian perturbation under the given scaling. sigma == 0 returns
// an exact zero vector and consumes nothing from the stream, so noiseless
// runs are bit-identical whether or not a stream is threaded through.
Vector gaussian_noise(int dim, double sigma, NoiseScaling scaling,
                      RngStream& stream);

// Expected one-round linear map of the deviation x - x* for the plain outer
// rule on a quadratic: (1 - gamma) I + gamma (I - eta Q)^local_steps.
// Applying it R times to (x0 - x*) gives the exact noiseless trajectory.
Matrix expected_round_map(const Matrix& hessian, double eta, double gamma,
                          int local_steps);

}  // namespace localopt
