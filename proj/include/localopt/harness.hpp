#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "localopt/engine.hpp"
#include "localopt/theory.hpp"
#include "localopt/tuner.hpp"

namespace localopt {

// Invalid or malformed experiment configuration; the message names the
// offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  int dim = 50;
  std::uint64_t problem_seed = 1;
  double ridge = kDefaultRidge;
};

// Grid axes for sweeps. Empty vectors mean "inherit a singleton from the run
// config"; explicitly configured axes must be non-empty. The cartesian
// product is walked with axes in this declaration order, seeds innermost.
struct SweepAxes {
  std::vector<std::string> outer_kinds;
  std::vector<double> gammas;
  std::vector<double> mus;
  std::vector<double> etas;
  std::vector<double> sigmas;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentSpec {
  std::string name;
  ProblemSpec problem;
  RunConfig run;
  SweepAxes sweep;
};

// Parses and validates the JSON experiment config. Unknown keys anywhere are
// errors, as are out-of-range values; both throw ConfigError naming the key.
// Schema (all keys optional unless noted):
//   name: string
//   problem: {dim, problem_seed, ridge}
//   run (required): {nodes, local_steps, rounds, eta, sigma,
//                    noise_scaling: "total"|"per-coord",
//                    outer: {kind: "plain"|"momentum"|"nesterov"|
//                                  "schedule_free", gamma, mu, beta},
//                    seed, record_level: "round"|"step"}
//   sweep: {outer_kinds, gammas, mus, etas, sigmas, seeds}
ExperimentSpec parse_experiment(const std::string& json_text);

// One flattened record per (config, seed). Field declaration order is the
// results CSV column order.
struct ResultRow {
  std::string outer;
  double gamma = 1;
  double mu = 0;
  double beta = 0.9;
  int nodes = 1;
  int local_steps = 1;
  int rounds = 1;
  double eta = 0;
  double sigma = 0;
  std::string noise_scaling;
  std::string record_level;
  std::uint64_t seed = 0;
  std::string status;  // "ok" | "diverged" | "error"
  double final_loss = 0;
  double final_loss_avg = 0;
  double final_dist_sq = 0;
  double tail_mean_loss = 0;  // mean broadcast-point loss, last 10 rounds
  double bound_value = 0;     // rate bound matching the outer rule (NaN for
                              // schedule-free, which has none here)
  bool bound_ok = false;      // stepsize conditions of that bound
  double h_objective = 0;     // closed-form tuner objective at (eta, gamma)
};

inline constexpr const char* kTraceHeader =
    "round,loss_x,loss_avg,dist_sq,delta_norm,drift_max,g1_sq_sum,g2_sq_sum,"
    "cos_sim_mean";
inline constexpr const char* kResultHeader =
    "outer,gamma,mu,beta,nodes,local_steps,rounds,eta,sigma,noise_scaling,"
    "record_level,seed,status,final_loss,final_loss_avg,final_dist_sq,"
    "tail_mean_loss,bound_value,bound_ok,h_objective";

// Shortest-exact float formatting: the fewest digits such that strtod on the
// output reproduces the stored double bit-exactly.
std::string format_float(double v);

void write_trace_csv(const std::string& path,
                     const std::vector<RoundTrace>& traces);
void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows);

QuadraticProblem build_problem(const ProblemSpec& spec);

// Runs the full cartesian product of the sweep axes across `threads` worker
// threads. Row order is canonical (axis declaration order, seeds innermost)
// no matter how many threads execute; a failed cell is recorded in its row's
// status and the sweep continues.
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, int threads);

// Outer-stepsize selection experiment on a seeded random quadratic: for each
// noise level in `sigmas` and each outer stepsize in `gammas`, run
// `seeds_per_cell` seeded simulations (R = 1000 rounds, H = 50 local steps,
// eta = 1e-3, plain rule) and score the cell by the mean over seeds of the
// last-10-round mean loss. best_index[i] is the argmin cell of row i.
struct GammaNoiseCell {
  double sigma = 0;
  double gamma = 0;
  double score = 0;
  int diverged = 0;
  std::vector<double> mean_loss_by_round;  // seed-mean broadcast-point loss
};
struct GammaNoiseStudy {
  std::vector<double> sigmas;
  std::vector<double> gammas;
  std::vector<GammaNoiseCell> cells;  // sigma-major order
  std::vector<int> best_index;        // per sigma, argmin over gammas
  int nodes = 0;
  int seeds_per_cell = 0;
  ProblemSpec problem;
};

inline const std::vector<double>& study_sigma_grid() {
  static const std::vector<double> g = {1e-3, 1e-2, 1e-1, 0.5, 1.0,
                                        5.0,  10.0, 15.0, 25.0, 50.0};
  return g;
}
inline const std::vector<double>& study_gamma_grid() {
  static const std::vector<double> g = {0.001, 0.01, 0.1, 0.5, 0.9,
                                        1.0,   1.1,  1.25, 1.5, 2.0};
  return g;
}

GammaNoiseStudy run_gamma_noise_study(const ProblemSpec& problem, int nodes,
                                      int threads, int seeds_per_cell = 5);

// Writes the study as plot-ready CSV plus a JSON summary into out_dir:
// scores.csv (sigma,gamma,score,diverged), optimal_gamma.csv
// (sigma,best_gamma,best_score), trajectories.csv (per-sigma winning-gamma
// seed-mean loss per round), summary.json (protocol echo and the
// multi-seed-averaging note).
void write_gamma_noise_study(const GammaNoiseStudy& study,
                             const std::string& out_dir);

// --threads resolution: explicit value if positive, else LOCALOPT_THREADS,
// else the hardware concurrency (at least 1).
int resolve_threads(int cli_threads);

// Canonical names used in configs and CSV output.
std::string outer_kind_name(OuterKind kind);
OuterKind outer_kind_from_name(const std::string& name);  // throws ConfigError
std::string noise_scaling_name(NoiseScaling scaling);
NoiseScaling noise_scaling_from_name(const std::string& name);
std::string record_level_name(RecordLevel level);
RecordLevel record_level_from_name(const std::string& name);

// The run's sigma expressed in the total convention (E||noise||^2 = sigma^2),
// which is what every bound and tuner formula expects.
double effective_total_sigma(const RunConfig& config, int dim);

// Rate bound matching the run's outer rule (NaN value and false for the
// schedule-free rule, which has no guarantee here), plus the tuner objective
// at the run's (eta, gamma); used to annotate sweep rows.
struct RowAnnotations {
  double bound_value = 0;
  bool bound_ok = false;
  double h_objective = 0;
};
RowAnnotations annotate(const QuadraticProblem& problem,
                        const RunConfig& config);

}  // namespace localopt
