#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "localopt/engine.hpp"

namespace localopt {

// Problem description for closed-form stepsize selection for the plain
// outer rule. dist0 must be positive, smoothness positive, sigma
// non-negative, the counts at least 1.
struct TunerInputs {
  double dist0 = 1;       // D
  double smoothness = 1;  // L
  double sigma = 0;       // gradient noise level
  int nodes = 1;          // M
  int local_steps = 1;    // H
  int rounds = 1;         // R
};

// The guarantee proxy the tuner minimizes:
//   D^2/(eta gamma R H) + L sigma^2 H eta^2
//   + eta (1 + (gamma-1)+) sigma^2 / M.
double tuning_objective(const TunerInputs& in, double eta, double gamma);

// Stepsize smallness condition attached to the guarantee:
//   eta L (1 + (gamma-1)+ H) <= 1/4 (tiny relative slack for candidates
// that sit exactly on the boundary).
bool tuning_feasible(const TunerInputs& in, double eta, double gamma);

struct TunerCandidate {
  bool feasible = false;
  double eta = 0;
  double gamma = 1;
  double objective = 0;
  double residual = 0;  // |cubic(eta)| for root-solved candidates, else 0
  std::string reason;   // why the candidate is unavailable, empty otherwise
};

// Interior candidate at gamma = 1: eta solves
//   2 L H sigma^2 eta^3 + (sigma^2/M) eta^2 - D^2/(R H) = 0
// (the stationarity condition of the objective in eta), clipped to 1/(4L).
// Noiseless inputs go straight to the clip. Always available.
TunerCandidate solve_candidate_a(const TunerInputs& in);

// Boundary candidate on the active stepsize constraint
//   gamma(eta) = 1 + (1/H) (1/(4 L eta) - 1), gamma >= 1:
// eta solves the stationarity condition of the objective along that curve,
//   (2 L sigma^2 H eta + sigma^2 (H-1)/(M H)) (4 L eta (H-1) + 1)^2
//     = 16 L^2 D^2 (H-1) / R,
// whose left side is strictly increasing, so the positive root is unique
// when it exists. Unavailable when H == 1 (the constraint does not couple
// eta and gamma), when sigma == 0, when the noise floor already exceeds the
// right side at eta -> 0 (no positive root), or when the root lands past
// 1/(4L) so gamma would drop below 1.
TunerCandidate solve_candidate_b(const TunerInputs& in);

// Vanishing-eta candidate: as eta -> 0 with the product u = gamma eta held
// fixed, the objective tends to D^2/(u R H) + u sigma^2/M (the curvature
// term dies), minimized at u = D sqrt(M/(R H sigma^2)) subject to the
// constraint cap u <= eta (H-1)/H + 1/(4 L H). Evaluated at the pinned
// eta = 1e-6/(4L); without it the two root candidates can sit arbitrarily
// far above the infimum in the high-noise corner. Unavailable when
// sigma == 0 or when the optimal u falls below eta (gamma would be < 1).
TunerCandidate solve_candidate_limit(const TunerInputs& in);

// Best available candidate by objective value (ties keep the earlier of
// a, b, limit). Throws std::invalid_argument on bad inputs.
struct TunerResult {
  TunerCandidate a;
  TunerCandidate b;
  TunerCandidate limit;
  int winner = 0;  // 0 = a, 1 = b, 2 = limit
  double eta = 0;
  double gamma = 1;
  double objective = 0;
};
TunerResult tune(const TunerInputs& in);

// Mean loss at the broadcast point over the trailing `tail` rounds (all
// rounds when the run is shorter).
double tail_mean_loss(const std::vector<RoundTrace>& traces, int tail);

// Grid search for the outer stepsize by simulation: for every gamma run the
// base config (gamma replaced, each seed in turn), score by tail-mean loss
// averaged over seeds, and pick the smallest score (earliest gamma on ties).
// Diverged runs score +infinity; a gamma with any diverged seed is reported
// with its diverged count. Throws std::runtime_error when every gamma
// diverges.
struct EmpiricalGammaRow {
  double gamma = 0;
  double score = 0;
  int diverged = 0;
};
struct EmpiricalGammaResult {
  double best_gamma = 0;
  std::vector<EmpiricalGammaRow> rows;
};
EmpiricalGammaResult empirical_tune_gamma(const QuadraticProblem& problem,
                                          const RunConfig& base,
                                          const std::vector<double>& gammas,
                                          const std::vector<std::uint64_t>& seeds,
                                          int tail = 10);

}  // namespace localopt
