#include "localopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"

namespace localopt {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_key(const std::string& scope, const std::string& key,
                          const std::string& what) {
  throw ConfigError("config key \"" + (scope.empty() ? key : scope + "." + key) +
                    "\": " + what);
}

void reject_unknown(const json& obj, const std::string& scope,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown config key \"" +
                        (scope.empty() ? it.key() : scope + "." + it.key()) +
                        "\"");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& scope, const char* key,
                  double fallback) {
  const json* v = find(obj, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_number()) {
    bad_key(scope, key, "expected a number");
  }
  return v->get<double>();
}

int get_int(const json& obj, const std::string& scope, const char* key,
            int fallback) {
  const json* v = find(obj, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_number_integer()) {
    bad_key(scope, key, "expected an integer");
  }
  return v->get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& scope,
                      const char* key, std::uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_number_unsigned() && !v->is_number_integer()) {
    bad_key(scope, key, "expected a non-negative integer");
  }
  if (v->is_number_integer() && v->get<std::int64_t>() < 0) {
    bad_key(scope, key, "expected a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& scope,
                       const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_string()) {
    bad_key(scope, key, "expected a string");
  }
  return v->get<std::string>();
}

template <typename T, typename Conv>
std::vector<T> get_array(const json& obj, const std::string& scope,
                         const char* key, Conv conv) {
  const json* v = find(obj, key);
  if (!v) {
    return {};
  }
  if (!v->is_array()) {
    bad_key(scope, key, "expected an array");
  }
  if (v->empty()) {
    bad_key(scope, key, "sweep axis must be non-empty");
  }
  std::vector<T> out;
  out.reserve(v->size());
  for (const json& item : *v) {
    out.push_back(conv(item, scope, key));
  }
  return out;
}

OuterSpec parse_outer(const json& obj) {
  reject_unknown(obj, "run.outer", {"kind", "gamma", "mu", "beta"});
  OuterSpec spec;
  spec.kind = outer_kind_from_name(
      get_string(obj, "run.outer", "kind", outer_kind_name(spec.kind)));
  spec.gamma = get_number(obj, "run.outer", "gamma", spec.gamma);
  spec.mu = get_number(obj, "run.outer", "mu", spec.mu);
  spec.beta = get_number(obj, "run.outer", "beta", spec.beta);
  if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) {
    bad_key("run.outer", "gamma", "gamma must be positive and finite");
  }
  if (!(spec.mu >= 0.0 && spec.mu < 1.0)) {
    bad_key("run.outer", "mu", "mu must lie in [0, 1)");
  }
  if (!(spec.beta >= 0.0 && spec.beta <= 1.0)) {
    bad_key("run.outer", "beta", "beta must lie in [0, 1]");
  }
  return spec;
}

RunConfig parse_run(const json& obj) {
  reject_unknown(obj, "run",
                 {"nodes", "local_steps", "rounds", "eta", "sigma",
                  "noise_scaling", "outer", "seed", "record_level"});
  RunConfig cfg;
  cfg.nodes = get_int(obj, "run", "nodes", cfg.nodes);
  cfg.local_steps = get_int(obj, "run", "local_steps", cfg.local_steps);
  cfg.rounds = get_int(obj, "run", "rounds", cfg.rounds);
  cfg.eta = get_number(obj, "run", "eta", cfg.eta);
  cfg.sigma = get_number(obj, "run", "sigma", cfg.sigma);
  cfg.noise_scaling = noise_scaling_from_name(get_string(
      obj, "run", "noise_scaling", noise_scaling_name(cfg.noise_scaling)));
  if (const json* outer = find(obj, "outer")) {
    if (!outer->is_object()) {
      bad_key("run", "outer", "expected an object");
    }
    cfg.outer = parse_outer(*outer);
  }
  cfg.seed = get_u64(obj, "run", "seed", cfg.seed);
  cfg.record_level = record_level_from_name(get_string(
      obj, "run", "record_level", record_level_name(cfg.record_level)));
  if (cfg.nodes < 1) {
    bad_key("run", "nodes", "must be at least 1");
  }
  if (cfg.local_steps < 1) {
    bad_key("run", "local_steps", "must be at least 1");
  }
  if (cfg.rounds < 1) {
    bad_key("run", "rounds", "must be at least 1");
  }
  if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta)) {
    bad_key("run", "eta", "must be non-negative and finite");
  }
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    bad_key("run", "sigma", "must be non-negative and finite");
  }
  return cfg;
}

ProblemSpec parse_problem(const json& obj) {
  reject_unknown(obj, "problem", {"dim", "problem_seed", "ridge"});
  ProblemSpec spec;
  spec.dim = get_int(obj, "problem", "dim", spec.dim);
  spec.problem_seed = get_u64(obj, "problem", "problem_seed", spec.problem_seed);
  spec.ridge = get_number(obj, "problem", "ridge", spec.ridge);
  if (spec.dim < 1) {
    bad_key("problem", "dim", "must be at least 1");
  }
  if (!(spec.ridge >= 0.0) || !std::isfinite(spec.ridge)) {
    bad_key("problem", "ridge", "must be non-negative and finite");
  }
  return spec;
}

SweepAxes parse_sweep(const json& obj) {
  reject_unknown(obj, "sweep",
                 {"outer_kinds", "gammas", "mus", "etas", "sigmas", "seeds"});
  const auto as_number = [](const json& item, const std::string& scope,
                            const char* key) {
    if (!item.is_number()) {
      bad_key(scope, key, "expected an array of numbers");
    }
    return item.get<double>();
  };
  const auto as_u64 = [](const json& item, const std::string& scope,
                         const char* key) {
    if (!item.is_number_unsigned() &&
        !(item.is_number_integer() && item.get<std::int64_t>() >= 0)) {
      bad_key(scope, key, "expected an array of non-negative integers");
    }
    return item.get<std::uint64_t>();
  };
  const auto as_kind = [](const json& item, const std::string& scope,
                          const char* key) {
    if (!item.is_string()) {
      bad_key(scope, key, "expected an array of strings");
    }
    return item.get<std::string>();
  };
  SweepAxes axes;
  axes.outer_kinds = get_array<std::string>(obj, "sweep", "outer_kinds", as_kind);
  for (const std::string& k : axes.outer_kinds) {
    outer_kind_from_name(k);  // validates
  }
  axes.gammas = get_array<double>(obj, "sweep", "gammas", as_number);
  axes.mus = get_array<double>(obj, "sweep", "mus", as_number);
  axes.etas = get_array<double>(obj, "sweep", "etas", as_number);
  axes.sigmas = get_array<double>(obj, "sweep", "sigmas", as_number);
  axes.seeds = get_array<std::uint64_t>(obj, "sweep", "seeds", as_u64);
  return axes;
}

// Runs fn(0..n-1) across `threads` workers; each index is claimed once, and
// results must be written by index so output order never depends on timing.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) {
          return;
        }
        fn(i);
      }
    });
  }
  for (std::thread& th : pool) {
    th.join();
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return out;
}

}  // namespace

std::string outer_kind_name(OuterKind kind) {
  switch (kind) {
    case OuterKind::kPlain:
      return "plain";
    case OuterKind::kMomentum:
      return "momentum";
    case OuterKind::kNesterov:
      return "nesterov";
    case OuterKind::kScheduleFree:
      return "schedule_free";
  }
  return "plain";
}

OuterKind outer_kind_from_name(const std::string& name) {
  if (name == "plain") return OuterKind::kPlain;
  if (name == "momentum") return OuterKind::kMomentum;
  if (name == "nesterov") return OuterKind::kNesterov;
  if (name == "schedule_free") return OuterKind::kScheduleFree;
  throw ConfigError("unknown outer kind \"" + name +
                    "\" (expected plain, momentum, nesterov, schedule_free)");
}

std::string noise_scaling_name(NoiseScaling scaling) {
  return scaling == NoiseScaling::kPerCoord ? "per-coord" : "total";
}

NoiseScaling noise_scaling_from_name(const std::string& name) {
  if (name == "total") return NoiseScaling::kTotal;
  if (name == "per-coord") return NoiseScaling::kPerCoord;
  throw ConfigError("unknown noise scaling \"" + name +
                    "\" (expected total or per-coord)");
}

std::string record_level_name(RecordLevel level) {
  return level == RecordLevel::kStep ? "step" : "round";
}

RecordLevel record_level_from_name(const std::string& name) {
  if (name == "round") return RecordLevel::kRound;
  if (name == "step") return RecordLevel::kStep;
  throw ConfigError("unknown record level \"" + name +
                    "\" (expected round or step)");
}

ExperimentSpec parse_experiment(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  reject_unknown(root, "", {"name", "problem", "run", "sweep"});
  ExperimentSpec spec;
  spec.name = get_string(root, "", "name", "");
  if (const json* problem = find(root, "problem")) {
    if (!problem->is_object()) {
      throw ConfigError("config key \"problem\": expected an object");
    }
    spec.problem = parse_problem(*problem);
  }
  const json* run = find(root, "run");
  if (!run) {
    throw ConfigError("config key \"run\" is required");
  }
  if (!run->is_object()) {
    throw ConfigError("config key \"run\": expected an object");
  }
  spec.run = parse_run(*run);
  if (const json* sweep = find(root, "sweep")) {
    if (!sweep->is_object()) {
      throw ConfigError("config key \"sweep\": expected an object");
    }
    spec.sweep = parse_sweep(*sweep);
  }
  return spec;
}

std::string format_float(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const std::string& path,
                     const std::vector<RoundTrace>& traces) {
  std::ofstream out = open_out(path);
  out << kTraceHeader << '\n';
  for (const RoundTrace& t : traces) {
    std::string row = std::to_string(t.round);
    row += ',';
    row += format_float(t.loss_x);
    row += ',';
    row += format_float(t.loss_avg);
    row += ',';
    row += format_float(t.dist_sq);
    row += ',';
    row += format_float(t.delta_norm);
    row += ',';
    row += format_float(t.drift_max);
    row += ',';
    row += format_float(t.g1_sq_sum);
    row += ',';
    row += format_float(t.g2_sq_sum);
    row += ',';
    row += format_float(t.cos_sim_mean);
    row += '\n';
    out << row;
  }
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out = open_out(path);
  out << kResultHeader << '\n';
  for (const ResultRow& r : rows) {
    std::string row = r.outer;
    row += ',';
    row += format_float(r.gamma);
    row += ',';
    row += format_float(r.mu);
    row += ',';
    row += format_float(r.beta);
    row += ',';
    row += std::to_string(r.nodes);
    row += ',';
    row += std::to_string(r.local_steps);
    row += ',';
    row += std::to_string(r.rounds);
    row += ',';
    row += format_float(r.eta);
    row += ',';
    row += format_float(r.sigma);
    row += ',';
    row += r.noise_scaling;
    row += ',';
    row += r.record_level;
    row += ',';
    row += std::to_string(r.seed);
    row += ',';
    row += r.status;
    row += ',';
    row += format_float(r.final_loss);
    row += ',';
    row += format_float(r.final_loss_avg);
    row += ',';
    row += format_float(r.final_dist_sq);
    row += ',';
    row += format_float(r.tail_mean_loss);
    row += ',';
    row += format_float(r.bound_value);
    row += ',';
    row += r.bound_ok ? "true" : "false";
    row += ',';
    row += format_float(r.h_objective);
    row += '\n';
    out << row;
  }
}

QuadraticProblem build_problem(const ProblemSpec& spec) {
  return make_random_quadratic(spec.dim, spec.problem_seed, spec.ridge);
}

double effective_total_sigma(const RunConfig& config, int dim) {
  if (config.noise_scaling == NoiseScaling::kPerCoord) {
    return config.sigma * std::sqrt(double(dim));
  }
  return config.sigma;
}

RowAnnotations annotate(const QuadraticProblem& problem,
                        const RunConfig& config) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  RowAnnotations out{kNan, false, kNan};
  const Vector x0 =
      config.x0 ? *config.x0 : Vector::Zero(problem.dim());
  const double dist0 = (x0 - problem.x_star).norm();
  const double sigma = effective_total_sigma(config, problem.dim());
  BoundInputs bi;
  bi.dist0 = dist0;
  bi.smoothness = problem.smoothness;
  bi.sigma = sigma;
  bi.nodes = config.nodes;
  bi.local_steps = config.local_steps;
  bi.rounds = config.rounds;
  bi.eta = config.eta;
  bi.gamma = config.outer.gamma;
  bi.mu = config.outer.mu;
  if (config.eta > 0.0) {
    switch (config.outer.kind) {
      case OuterKind::kPlain: {
        const BoundReport rep = plain_rate_bound(bi);
        out.bound_value = rep.value;
        out.bound_ok = rep.stepsize_ok;
        break;
      }
      case OuterKind::kMomentum: {
        const BoundReport rep = momentum_rate_bound(bi);
        out.bound_value = rep.value;
        out.bound_ok = rep.stepsize_ok;
        break;
      }
      case OuterKind::kNesterov: {
        const BoundReport rep = accelerated_rate_bound(bi);
        out.bound_value = rep.value;
        out.bound_ok = rep.stepsize_ok;
        break;
      }
      case OuterKind::kScheduleFree:
        break;
    }
    if (dist0 > 0.0) {
      TunerInputs ti{dist0,        problem.smoothness, sigma,
                     config.nodes, config.local_steps, config.rounds};
      out.h_objective = tuning_objective(ti, config.eta, config.outer.gamma);
    }
  }
  return out;
}

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, int threads) {
  SweepAxes ax = spec.sweep;
  if (ax.outer_kinds.empty()) {
    ax.outer_kinds = {outer_kind_name(spec.run.outer.kind)};
  }
  if (ax.gammas.empty()) ax.gammas = {spec.run.outer.gamma};
  if (ax.mus.empty()) ax.mus = {spec.run.outer.mu};
  if (ax.etas.empty()) ax.etas = {spec.run.eta};
  if (ax.sigmas.empty()) ax.sigmas = {spec.run.sigma};
  if (ax.seeds.empty()) ax.seeds = {spec.run.seed};

  const QuadraticProblem problem = build_problem(spec.problem);
  const std::size_t n = ax.outer_kinds.size() * ax.gammas.size() *
                        ax.mus.size() * ax.etas.size() * ax.sigmas.size() *
                        ax.seeds.size();
  std::vector<ResultRow> rows(n);
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

  parallel_for(n, threads, [&](std::size_t i) {
    // Decompose the row index with seeds fastest, axes in declaration order.
    std::size_t rest = i;
    const std::size_t i_seed = rest % ax.seeds.size();
    rest /= ax.seeds.size();
    const std::size_t i_sigma = rest % ax.sigmas.size();
    rest /= ax.sigmas.size();
    const std::size_t i_eta = rest % ax.etas.size();
    rest /= ax.etas.size();
    const std::size_t i_mu = rest % ax.mus.size();
    rest /= ax.mus.size();
    const std::size_t i_gamma = rest % ax.gammas.size();
    rest /= ax.gammas.size();
    const std::size_t i_kind = rest;

    RunConfig cfg = spec.run;
    cfg.outer.kind = outer_kind_from_name(ax.outer_kinds[i_kind]);
    cfg.outer.gamma = ax.gammas[i_gamma];
    cfg.outer.mu = ax.mus[i_mu];
    cfg.eta = ax.etas[i_eta];
    cfg.sigma = ax.sigmas[i_sigma];
    cfg.seed = ax.seeds[i_seed];

    ResultRow& row = rows[i];
    row.outer = outer_kind_name(cfg.outer.kind);
    row.gamma = cfg.outer.gamma;
    row.mu = cfg.outer.mu;
    row.beta = cfg.outer.beta;
    row.nodes = cfg.nodes;
    row.local_steps = cfg.local_steps;
    row.rounds = cfg.rounds;
    row.eta = cfg.eta;
    row.sigma = cfg.sigma;
    row.noise_scaling = noise_scaling_name(cfg.noise_scaling);
    row.record_level = record_level_name(cfg.record_level);
    row.seed = cfg.seed;
    row.final_loss = kNan;
    row.final_loss_avg = kNan;
    row.final_dist_sq = kNan;
    row.tail_mean_loss = kNan;

    const RowAnnotations ann = annotate(problem, cfg);
    row.bound_value = ann.bound_value;
    row.bound_ok = ann.bound_ok;
    row.h_objective = ann.h_objective;

    try {
      const RunResult res = run(problem, cfg);
      const RoundTrace& last = res.traces.back();
      row.status = "ok";
      row.final_loss = last.loss_x;
      row.final_loss_avg = last.loss_avg;
      row.final_dist_sq = last.dist_sq;
      row.tail_mean_loss = tail_mean_loss(res.traces, 10);
    } catch (const DivergenceError&) {
      row.status = "diverged";
    } catch (const std::exception&) {
      row.status = "error";
    }
  });
  return rows;
}

GammaNoiseStudy run_gamma_noise_study(const ProblemSpec& problem_spec,
                                      int nodes, int threads,
                                      int seeds_per_cell) {
  if (nodes < 1) {
    throw std::invalid_argument("nodes must be at least 1");
  }
  if (seeds_per_cell < 1) {
    throw std::invalid_argument("seeds_per_cell must be at least 1");
  }
  const QuadraticProblem problem = build_problem(problem_spec);
  GammaNoiseStudy study;
  study.sigmas = study_sigma_grid();
  study.gammas = study_gamma_grid();
  study.nodes = nodes;
  study.seeds_per_cell = seeds_per_cell;
  study.problem = problem_spec;
  const std::size_t n = study.sigmas.size() * study.gammas.size();
  study.cells.resize(n);

  constexpr int kRounds = 1000;
  constexpr int kLocalSteps = 50;
  constexpr double kEta = 1e-3;
  constexpr int kTail = 10;

  parallel_for(n, threads, [&](std::size_t i) {
    const std::size_t i_sigma = i / study.gammas.size();
    const std::size_t i_gamma = i % study.gammas.size();
    GammaNoiseCell& cell = study.cells[i];
    cell.sigma = study.sigmas[i_sigma];
    cell.gamma = study.gammas[i_gamma];

    RunConfig cfg;
    cfg.nodes = nodes;
    cfg.local_steps = kLocalSteps;
    cfg.rounds = kRounds;
    cfg.eta = kEta;
    cfg.sigma = cell.sigma;
    cfg.outer.kind = OuterKind::kPlain;
    cfg.outer.gamma = cell.gamma;

    std::vector<double> traj_sum(kRounds, 0.0);
    double score_sum = 0.0;
    int ok = 0;
    for (int s = 1; s <= seeds_per_cell; ++s) {
      cfg.seed = static_cast<std::uint64_t>(s);
      try {
        const RunResult res = run(problem, cfg);
        for (int r = 0; r < kRounds; ++r) {
          traj_sum[r] += res.traces[r].loss_x;
        }
        score_sum += tail_mean_loss(res.traces, kTail);
        ++ok;
      } catch (const DivergenceError&) {
        ++cell.diverged;
      }
    }
    if (ok == seeds_per_cell) {
      cell.score = score_sum / double(ok);
      cell.mean_loss_by_round.resize(kRounds);
      for (int r = 0; r < kRounds; ++r) {
        cell.mean_loss_by_round[r] = traj_sum[r] / double(ok);
      }
    } else {
      cell.score = std::numeric_limits<double>::infinity();
      cell.mean_loss_by_round.assign(
          kRounds, std::numeric_limits<double>::quiet_NaN());
    }
  });

  study.best_index.resize(study.sigmas.size());
  for (std::size_t i_sigma = 0; i_sigma < study.sigmas.size(); ++i_sigma) {
    std::size_t best = 0;
    for (std::size_t i_gamma = 1; i_gamma < study.gammas.size(); ++i_gamma) {
      const std::size_t idx = i_sigma * study.gammas.size() + i_gamma;
      if (study.cells[idx].score <
          study.cells[i_sigma * study.gammas.size() + best].score) {
        best = i_gamma;
      }
    }
    study.best_index[i_sigma] = static_cast<int>(best);
  }
  return study;
}

void write_gamma_noise_study(const GammaNoiseStudy& study,
                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  {
    std::ofstream out = open_out((dir / "scores.csv").string());
    out << "sigma,gamma,score,diverged\n";
    for (const GammaNoiseCell& cell : study.cells) {
      std::string row = format_float(cell.sigma);
      row += ',';
      row += format_float(cell.gamma);
      row += ',';
      row += format_float(cell.score);
      row += ',';
      row += std::to_string(cell.diverged);
      row += '\n';
      out << row;
    }
  }
  {
    std::ofstream out = open_out((dir / "optimal_gamma.csv").string());
    out << "sigma,best_gamma,best_score\n";
    for (std::size_t i = 0; i < study.sigmas.size(); ++i) {
      const GammaNoiseCell& cell =
          study.cells[i * study.gammas.size() + study.best_index[i]];
      std::string row = format_float(study.sigmas[i]);
      row += ',';
      row += format_float(cell.gamma);
      row += ',';
      row += format_float(cell.score);
      row += '\n';
      out << row;
    }
  }
  {
    std::ofstream out = open_out((dir / "trajectories.csv").string());
    out << "sigma,gamma,round,loss\n";
    for (std::size_t i = 0; i < study.sigmas.size(); ++i) {
      const GammaNoiseCell& cell =
          study.cells[i * study.gammas.size() + study.best_index[i]];
      for (std::size_t r = 0; r < cell.mean_loss_by_round.size(); ++r) {
        std::string row = format_float(cell.sigma);
        row += ',';
        row += format_float(cell.gamma);
        row += ',';
        row += std::to_string(r);
        row += ',';
        row += format_float(cell.mean_loss_by_round[r]);
        row += '\n';
        out << row;
      }
    }
  }
  {
    ordered_json summary;
    summary["protocol"] = {
        {"problem",
         {{"dim", study.problem.dim},
          {"problem_seed", study.problem.problem_seed},
          {"ridge", study.problem.ridge}}},
        {"nodes", study.nodes},
        {"rounds", 1000},
        {"local_steps", 50},
        {"eta", 1e-3},
        {"outer", "plain"},
        {"noise_scaling", "total"},
        {"sigma_grid", study.sigmas},
        {"gamma_grid", study.gammas},
        {"seeds_per_cell", study.seeds_per_cell},
        {"score", "mean over seeds of the mean broadcast-point loss over the "
                  "final 10 rounds"}};
    summary["note"] =
        "each (sigma, gamma) cell averages seeds_per_cell seeded runs; a "
        "single run per cell would select the same trend but with a noisier "
        "argmin";
    ordered_json table = ordered_json::array();
    for (std::size_t i = 0; i < study.sigmas.size(); ++i) {
      const GammaNoiseCell& cell =
          study.cells[i * study.gammas.size() + study.best_index[i]];
      table.push_back({{"sigma", study.sigmas[i]},
                       {"best_gamma", cell.gamma},
                       {"best_score", cell.score}});
    }
    summary["optimal_gamma"] = table;
    std::ofstream out = open_out((dir / "summary.json").string());
    out << summary.dump(2) << '\n';
  }
}

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) {
    return cli_threads;
  }
  if (const char* env = std::getenv("LOCALOPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096) {
      throw ConfigError(
          "LOCALOPT_THREADS must be a positive integer, got \"" +
          std::string(env) + "\"");
    }
    return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace localopt
