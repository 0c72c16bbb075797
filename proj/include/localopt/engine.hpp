#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "localopt/outer.hpp"
#include "localopt/problems.hpp"

namespace localopt {

// kRound keeps one summary row per round. kStep additionally keeps per-step
// gradient statistics and drift values, which the data-dependent diagnostics
// need; it costs O(R * H) extra memory.
enum class RecordLevel { kRound, kStep };

struct RunConfig {
  int nodes = 1;        // number of parallel workers M
  int local_steps = 1;  // inner gradient steps per round H
  int rounds = 1;       // outer rounds R
  double eta = 0.1;     // inner stepsize
  double sigma = 0.0;   // gradient noise level (see noise_scaling)
  NoiseScaling noise_scaling = NoiseScaling::kTotal;
  OuterSpec outer;
  std::uint64_t seed = 0;
  RecordLevel record_level = RecordLevel::kRound;
  std::optional<Vector> x0;  // start point; defaults to the origin
};

// One row per round, written after that round's outer update.
struct RoundTrace {
  int round = 0;             // 0-based round index
  double loss_x = 0;         // f at the post-update broadcast point
  double loss_avg = 0;       // f at the running mean of virtual iterates
  double dist_sq = 0;        // squared distance of broadcast point to optimum
  double delta_norm = 0;     // norm of the round's averaged displacement
  double drift_max = 0;      // max within the round of pairwise node drift
  double g1_sq_sum = 0;      // sum over steps of ||averaged gradient||^2
  double g2_sq_sum = 0;      // sum over steps of node-mean ||gradient||^2
  double cos_sim_mean = 0;   // mean pairwise cosine of node displacements
};

// Per-(round, step) gradient statistics at the evaluation point, i.e. the
// iterates the step's gradients were taken at. Only kept at kStep level.
struct StepRecord {
  double g_avg_sq = 0;           // ||(1/M) sum_m g_m||^2
  double g_avg_norm = 0;         // ||(1/M) sum_m g_m||
  double g_local_sq_mean = 0;    // (1/M) sum_m ||g_m||^2
  double g_local_norm_mean = 0;  // (1/M) sum_m ||g_m||
  double regret_dot = 0;         // <virtual iterate - round start, avg grad>
};

// Node dispersion at one within-round index h in [0, H]: v is the mean
// squared deviation from the node mean, lambda the mean pairwise squared
// distance (lambda = 2 v). Only kept at kStep level; R*(H+1) entries.
struct DriftPoint {
  double v = 0;
  double lambda = 0;
};

struct RunResult {
  RunConfig config;
  OuterState final_state;
  Vector avg_iterate;         // mean over rounds and steps of virtual iterates
  double avg_local_loss = 0;  // mean over nodes, rounds, steps of node loss
  std::vector<RoundTrace> traces;        // one per round
  std::vector<StepRecord> steps;         // kStep only, R*H entries
  std::vector<DriftPoint> drift;         // kStep only, R*(H+1) entries
  std::vector<double> round_disp_sq;     // kStep only: ||virtual end - start||^2
};

// Raised when the broadcast point blows past 1e12 times its starting squared
// distance to the optimum (or turns non-finite). Carries the offending round.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int round, double dist_sq)
      : std::runtime_error("run diverged at round " + std::to_string(round)),
        round_(round),
        dist_sq_(dist_sq) {}
  int round() const { return round_; }
  double dist_sq() const { return dist_sq_; }

 private:
  int round_;
  double dist_sq_;
};

// Simulates local SGD with the configured outer rule. Deterministic given
// (problem, config): gradient noise for node m in round r comes from the
// stream keyed (seed, noise tag, m, r), consumed step by step, so results do
// not depend on scheduling and sigma == 0 consumes no randomness at all.
// Throws std::invalid_argument on bad config and DivergenceError as above.
RunResult run(const QuadraticProblem& problem, const RunConfig& config);

}  // namespace localopt
