#pragma once

#include <string>
#include <utility>
#include <vector>

#include "localopt/engine.hpp"

namespace localopt {

// Problem- and schedule-level quantities the convergence bounds depend on.
// sigma is the total noise level (E||noise||^2 = sigma^2 per gradient).
struct BoundInputs {
  double dist0 = 0;       // D, distance of the start point to the optimum
  double smoothness = 0;  // L, largest Hessian eigenvalue
  double sigma = 0;       // gradient noise level
  int nodes = 1;          // M
  int local_steps = 1;    // H
  int rounds = 1;         // R
  double eta = 0;         // inner stepsize
  double gamma = 1;       // outer stepsize
  double mu = 0;          // heavy-ball coefficient (momentum bound only)
};

// A guarantee on the mean loss of averaged iterates, split into additive
// terms. stepsize_ok reports whether the stepsize smallness conditions the
// guarantee needs actually hold for these inputs; the value is still
// computed when they do not, so callers can see how far off they are.
struct BoundReport {
  double value = 0;
  bool stepsize_ok = false;
  std::vector<std::pair<std::string, double>> terms;
};

// Rate bound for the plain outer rule:
//   2 D^2/(gamma eta R H) + 8 L eta^2 sigma^2 H
//   + 2 eta (1 + (gamma-1)+) sigma^2 / M,
// valid when eta L (1 + (gamma-1)+ H) <= 1/4.
BoundReport plain_rate_bound(const BoundInputs& in);

// Rate bound for the heavy-ball outer rule:
//   4 (1-mu) D^2/(eta gamma H R) + 16 L eta^2 sigma^2 H
//   + (4 eta sigma^2 / M) max(gamma/(1-mu), 1)
//   + 8 eta gamma mu sigma^2 / ((1-mu) M),
// valid when eta L (1 + (gamma/(1-mu) - 1)+ H) <= 1/4 and
// eta gamma mu L H / (1-mu) <= 1/16. Collapses to twice the plain bound's
// shape at mu = 0.
BoundReport momentum_rate_bound(const BoundInputs& in);

// Rate bound for the accelerated outer rule (on its un-damped sequence):
//   2 D^2/(gamma eta R^2 H) + R L eta^2 sigma^2 H / (2 M)
//   + R L^2 eta^3 sigma^2 H^2 / 2 + gamma eta sigma^2 R / (2 M),
// valid when 2 L eta <= 1 and gamma <= 1.
BoundReport accelerated_rate_bound(const BoundInputs& in);

// Stepsize for the accelerated rule at gamma = 1 balancing the four terms:
// the smallest of 1/(2L), (2 M D^2/(R^3 L sigma^2 H^2))^(1/3),
// (4 D^2/(3 R^3 L^2 sigma^2 H^3))^(1/4), sqrt(4 M D^2/(R^3 H sigma^2)).
double accelerated_tuned_eta(const BoundInputs& in);

// Exact minimizer over x > 0 of a/x + b x + c |1 - x| for non-negative
// coefficients. Cases, checked in order:
//   kSqrtSum:  a >= b + c            -> sqrt(a / (b + c))   (x >= 1 branch)
//   kSqrtDiff: b >= c and a <= b - c -> sqrt(a / (b - c))   (x <= 1 branch)
//   kOne:      otherwise             -> 1                   (kink optimal)
// Throws std::invalid_argument when all three are zero (every x optimal) or
// when a > 0 = b + c (no minimizer exists).
enum class TradeoffCase { kSqrtSum, kSqrtDiff, kOne };
struct TradeoffResult {
  double x = 1;
  TradeoffCase which = TradeoffCase::kOne;
};
TradeoffResult gamma_tradeoff_argmin(double a, double b, double c);

// Data-dependent decomposition of a run's guarantee, evaluated from recorded
// per-step gradient statistics (unit constants, log factor iota, default 1):
//   opt:         D^2 / (gamma eta R H)
//   grad_energy: (gamma eta / (R H)) sum_{r,h} ||avg grad||^2
//   noise:       gamma eta sigma^2 iota^2
//   gamma_gap:   (|1-gamma| eta / (R H)) sum_r (sum_h ||avg grad||)^2
//   drift:       (eta / (gamma H)) (max_r (1/M) sum_{m,h} ||grad||)^2
//   noise_cross: eta sigma iota sqrt((1/(M R)) sum_{m,r,h} ||grad||^2)
// sigma is taken from the run config and converted to the total convention
// when the run used per-coordinate scaling. Requires step-level records.
struct DataTerms {
  double opt = 0;
  double grad_energy = 0;
  double noise = 0;
  double gamma_gap = 0;
  double drift = 0;
  double noise_cross = 0;
  double total = 0;
};
DataTerms data_dependent_terms(const RunResult& result, double dist0,
                               double iota = 1.0);

// Picks the outer stepsize minimizing the data-dependent trade-off
//   a / gamma + b gamma + c |1 - gamma| with
//   a = D^2/(eta R H) + eta H G2^2, b = eta (G1^2 + sigma^2),
//   c = eta H G1^2,
// where G1^2 and G2^2 are the mean squared averaged-gradient and node-
// gradient scales with the noise floor subtracted (max(raw - floor, 0),
// floors sigma^2/M and sigma^2): the raw second moments include the noise
// the trade-off already accounts for separately, and without the correction
// the noisy regime could never be detected. The regime label reads the
// returned gamma: below 1 noise_dominated, 1 balanced, above 1
// optimization_dominated.
struct GammaRecommendation {
  double gamma = 1;
  double a = 0, b = 0, c = 0;
  double g1_sq = 0, g2_sq = 0;  // noise-corrected squared gradient scales
  std::string regime;
};
GammaRecommendation recommend_gamma(const RunResult& result, double dist0);

}  // namespace localopt
