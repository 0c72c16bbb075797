#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "localopt/diagnostics.hpp"
#include "localopt/harness.hpp"

namespace {

using localopt::ConfigError;
using localopt::DivergenceError;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;       // config or runtime failure
constexpr int kExitDiverged = 2;    // simulation blew up

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit_error(const std::string& kind, const std::string& message,
                int round = -1) {
  ordered_json err;
  err["error"]["kind"] = kind;
  err["error"]["message"] = message;
  if (round >= 0) {
    err["error"]["round"] = round;
  }
  std::cerr << err.dump(2) << '\n';
}

// Shared optional overrides on top of the config file.
struct Overrides {
  std::uint64_t seed = 0;
  bool has_seed = false;
  int nodes = 0;
  std::string noise_scaling;
};

void apply(const Overrides& ov, localopt::ExperimentSpec& spec) {
  if (ov.has_seed) {
    spec.run.seed = ov.seed;
  }
  if (ov.nodes > 0) {
    spec.run.nodes = ov.nodes;
  }
  if (!ov.noise_scaling.empty()) {
    spec.run.noise_scaling =
        localopt::noise_scaling_from_name(ov.noise_scaling);
  }
}

ordered_json run_config_json(const localopt::RunConfig& cfg) {
  ordered_json j;
  j["nodes"] = cfg.nodes;
  j["local_steps"] = cfg.local_steps;
  j["rounds"] = cfg.rounds;
  j["eta"] = cfg.eta;
  j["sigma"] = cfg.sigma;
  j["noise_scaling"] = localopt::noise_scaling_name(cfg.noise_scaling);
  j["outer"] = {{"kind", localopt::outer_kind_name(cfg.outer.kind)},
                {"gamma", cfg.outer.gamma},
                {"mu", cfg.outer.mu},
                {"beta", cfg.outer.beta}};
  j["seed"] = cfg.seed;
  j["record_level"] = localopt::record_level_name(cfg.record_level);
  return j;
}

ordered_json problem_json(const localopt::ProblemSpec& spec,
                          const localopt::QuadraticProblem& problem,
                          double dist0) {
  ordered_json j;
  j["dim"] = spec.dim;
  j["problem_seed"] = spec.problem_seed;
  j["ridge"] = spec.ridge;
  j["smoothness"] = problem.smoothness;
  j["dist0"] = dist0;
  return j;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << j.dump(2) << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const Overrides& ov) {
  localopt::ExperimentSpec spec =
      localopt::parse_experiment(read_file(config_path));
  apply(ov, spec);
  const localopt::QuadraticProblem problem =
      localopt::build_problem(spec.problem);
  const localopt::RunResult res = localopt::run(problem, spec.run);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  localopt::write_trace_csv((dir / "trace.csv").string(), res.traces);

  const localopt::RoundTrace& last = res.traces.back();
  const double dist0 = problem.x_star.norm();
  ordered_json summary;
  summary["name"] = spec.name;
  summary["problem"] = problem_json(spec.problem, problem, dist0);
  summary["run"] = run_config_json(spec.run);
  summary["final"] = {{"rounds", spec.run.rounds},
                      {"loss_x", last.loss_x},
                      {"loss_avg", last.loss_avg},
                      {"dist_sq", last.dist_sq},
                      {"delta_norm", last.delta_norm}};
  summary["avg_local_loss"] = res.avg_local_loss;
  summary["loss_at_avg_iterate"] = problem.loss(res.avg_iterate);
  write_json((dir / "summary.json").string(), summary);
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              int threads, const Overrides& ov) {
  localopt::ExperimentSpec spec =
      localopt::parse_experiment(read_file(config_path));
  apply(ov, spec);
  const std::vector<localopt::ResultRow> rows =
      localopt::run_sweep(spec, localopt::resolve_threads(threads));
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  localopt::write_results_csv((dir / "results.csv").string(), rows);
  ordered_json out;
  out["rows"] = rows.size();
  out["results_csv"] = (dir / "results.csv").string();
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

const char* tradeoff_case_name(localopt::TradeoffCase c) {
  switch (c) {
    case localopt::TradeoffCase::kSqrtSum:
      return "sqrt_ratio_to_sum";
    case localopt::TradeoffCase::kSqrtDiff:
      return "sqrt_ratio_to_diff";
    case localopt::TradeoffCase::kOne:
      return "one";
  }
  return "one";
}

ordered_json candidate_json(const localopt::TunerCandidate& c) {
  ordered_json j;
  j["feasible"] = c.feasible;
  if (c.feasible) {
    j["eta"] = c.eta;
    j["gamma"] = c.gamma;
    j["objective"] = c.objective;
    j["residual"] = c.residual;
  } else {
    j["reason"] = c.reason;
  }
  return j;
}

int cmd_tune(const localopt::TunerInputs& in) {
  const localopt::TunerResult res = localopt::tune(in);
  ordered_json j;
  j["inputs"] = {{"dist0", in.dist0},   {"smoothness", in.smoothness},
                 {"sigma", in.sigma},   {"nodes", in.nodes},
                 {"local_steps", in.local_steps}, {"rounds", in.rounds}};
  const char* names[3] = {"a", "b", "limit"};
  j["winner"] = names[res.winner];
  j["eta"] = res.eta;
  j["gamma"] = res.gamma;
  j["objective"] = res.objective;
  j["candidates"] = {{"a", candidate_json(res.a)},
                     {"b", candidate_json(res.b)},
                     {"limit", candidate_json(res.limit)}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_bound(const std::string& rule, const localopt::BoundInputs& in) {
  localopt::BoundReport rep;
  if (rule == "plain") {
    rep = localopt::plain_rate_bound(in);
  } else if (rule == "momentum") {
    rep = localopt::momentum_rate_bound(in);
  } else if (rule == "accelerated") {
    rep = localopt::accelerated_rate_bound(in);
  } else {
    throw ConfigError("unknown bound rule \"" + rule +
                      "\" (expected plain, momentum, accelerated)");
  }
  ordered_json j;
  j["rule"] = rule;
  j["inputs"] = {{"dist0", in.dist0},
                 {"smoothness", in.smoothness},
                 {"sigma", in.sigma},
                 {"nodes", in.nodes},
                 {"local_steps", in.local_steps},
                 {"rounds", in.rounds},
                 {"eta", in.eta},
                 {"gamma", in.gamma},
                 {"mu", in.mu}};
  j["value"] = rep.value;
  j["stepsize_ok"] = rep.stepsize_ok;
  ordered_json terms;
  for (const auto& [name, value] : rep.terms) {
    terms[name] = value;
  }
  j["terms"] = terms;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_diagnose(const std::string& config_path, const std::string& out_dir,
                 const Overrides& ov) {
  localopt::ExperimentSpec spec =
      localopt::parse_experiment(read_file(config_path));
  apply(ov, spec);
  // The data-dependent report needs per-step records regardless of what the
  // config asked to keep.
  spec.run.record_level = localopt::RecordLevel::kStep;
  const localopt::QuadraticProblem problem =
      localopt::build_problem(spec.problem);
  const localopt::RunResult res = localopt::run(problem, spec.run);

  const localopt::Vector x0 = spec.run.x0
                                  ? *spec.run.x0
                                  : localopt::Vector::Zero(problem.dim());
  const double dist0 = (x0 - problem.x_star).norm();
  const localopt::GradientStats gs = localopt::gradient_stats(res);
  const localopt::GammaRecommendation rec =
      localopt::recommend_gamma(res, dist0);
  const localopt::DataTerms terms = localopt::data_dependent_terms(res, dist0);
  const localopt::RowAnnotations ann = localopt::annotate(problem, spec.run);

  double drift_peak = 0.0;
  double cos_mean = 0.0;
  for (const localopt::RoundTrace& t : res.traces) {
    drift_peak = std::max(drift_peak, t.drift_max);
    cos_mean += t.cos_sim_mean;
  }
  cos_mean /= double(res.traces.size());

  ordered_json j;
  j["name"] = spec.name;
  j["problem"] = problem_json(spec.problem, problem, dist0);
  j["run"] = run_config_json(spec.run);
  j["gradient_scales"] = {{"g1_rms", gs.g1_rms}, {"g2_rms", gs.g2_rms}};
  j["recommendation"] = {{"gamma", rec.gamma}, {"regime", rec.regime},
                         {"a", rec.a},         {"b", rec.b},
                         {"c", rec.c},         {"g1_sq", rec.g1_sq},
                         {"g2_sq", rec.g2_sq}};
  j["data_dependent_terms"] = {{"opt", terms.opt},
                               {"grad_energy", terms.grad_energy},
                               {"noise", terms.noise},
                               {"gamma_gap", terms.gamma_gap},
                               {"drift", terms.drift},
                               {"noise_cross", terms.noise_cross},
                               {"total", terms.total}};
  j["rate_bound"] = {{"value", ann.bound_value}, {"stepsize_ok", ann.bound_ok}};
  j["h_objective"] = ann.h_objective;
  j["drift_peak"] = drift_peak;
  j["cosine_mean_over_rounds"] = cos_mean;
  j["final_loss"] = res.traces.back().loss_x;

  std::filesystem::create_directories(out_dir);
  write_json((std::filesystem::path(out_dir) / "diagnose.json").string(), j);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_reproduce_fig1(const std::string& out_dir, int nodes, int threads,
                       std::uint64_t problem_seed) {
  localopt::ProblemSpec problem;
  problem.dim = 50;
  problem.problem_seed = problem_seed;
  const localopt::GammaNoiseStudy study = localopt::run_gamma_noise_study(
      problem, nodes, localopt::resolve_threads(threads));
  localopt::write_gamma_noise_study(study, out_dir);
  ordered_json j;
  j["out_dir"] = out_dir;
  j["nodes"] = nodes;
  ordered_json table = ordered_json::array();
  for (std::size_t i = 0; i < study.sigmas.size(); ++i) {
    const localopt::GammaNoiseCell& cell =
        study.cells[i * study.gammas.size() + study.best_index[i]];
    table.push_back({{"sigma", study.sigmas[i]},
                     {"best_gamma", cell.gamma},
                     {"best_score", cell.score}});
  }
  j["optimal_gamma"] = table;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "localopt: deterministic simulator and rate-bound toolkit for local "
      "SGD with a server-side outer optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  Overrides ov;
  std::string rule = "plain";
  localopt::TunerInputs tuner_in;
  localopt::BoundInputs bound_in;
  std::uint64_t fig1_seed = 1;
  int fig1_nodes = 4;

  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "experiment config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_out) {
      cmd->add_option("--out", out_dir, "output directory")->required();
    }
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&ov](const std::uint64_t& v) {
          ov.seed = v;
          ov.has_seed = true;
        },
        "override the run seed");
    cmd->add_option("--nodes", ov.nodes, "override the node count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--noise-scaling", ov.noise_scaling,
                    "override the noise scaling")
        ->check(CLI::IsMember({"total", "per-coord"}));
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "simulate one configuration, write trace CSV "
                                "and summary JSON");
  add_common(run_cmd, true);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "run the cartesian product of the config's sweep axes");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--threads", threads, "worker threads")
      ->check(CLI::PositiveNumber);

  CLI::App* tune_cmd = app.add_subcommand(
      "tune", "closed-form (eta, gamma) selection for the plain rule");
  tune_cmd->add_option("--dist0", tuner_in.dist0, "start distance D")
      ->required();
  tune_cmd->add_option("--smoothness", tuner_in.smoothness, "smoothness L")
      ->required();
  tune_cmd->add_option("--sigma", tuner_in.sigma, "noise level")->required();
  tune_cmd->add_option("--nodes", tuner_in.nodes, "node count M")->required();
  tune_cmd->add_option("--local-steps", tuner_in.local_steps, "steps H")
      ->required();
  tune_cmd->add_option("--rounds", tuner_in.rounds, "rounds R")->required();

  CLI::App* bound_cmd =
      app.add_subcommand("bound", "evaluate a convergence rate bound");
  bound_cmd->add_option("--rule", rule, "plain | momentum | accelerated")
      ->required()
      ->check(CLI::IsMember({"plain", "momentum", "accelerated"}));
  bound_cmd->add_option("--dist0", bound_in.dist0)->required();
  bound_cmd->add_option("--smoothness", bound_in.smoothness)->required();
  bound_cmd->add_option("--sigma", bound_in.sigma)->required();
  bound_cmd->add_option("--nodes", bound_in.nodes)->required();
  bound_cmd->add_option("--local-steps", bound_in.local_steps)->required();
  bound_cmd->add_option("--rounds", bound_in.rounds)->required();
  bound_cmd->add_option("--eta", bound_in.eta)->required();
  bound_cmd->add_option("--gamma", bound_in.gamma)->required();
  bound_cmd->add_option("--mu", bound_in.mu, "momentum rule only");

  CLI::App* diag_cmd = app.add_subcommand(
      "diagnose", "run at step level and report data-dependent diagnostics");
  add_common(diag_cmd, true);

  CLI::App* reproduce_cmd =
      app.add_subcommand("reproduce", "rebuild a bundled experiment");
  reproduce_cmd->require_subcommand(1);
  CLI::App* fig1_cmd = reproduce_cmd->add_subcommand(
      "fig1", "optimal outer stepsize vs noise level study");
  fig1_cmd->add_option("--out", out_dir, "output directory")->required();
  fig1_cmd->add_option("--nodes", fig1_nodes, "node count (default 4)")
      ->check(CLI::PositiveNumber);
  fig1_cmd->add_option("--threads", threads, "worker threads")
      ->check(CLI::PositiveNumber);
  fig1_cmd->add_option("--seed", fig1_seed, "problem seed (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run_cmd)) {
      return cmd_run(config_path, out_dir, ov);
    }
    if (app.got_subcommand(sweep_cmd)) {
      return cmd_sweep(config_path, out_dir, threads, ov);
    }
    if (app.got_subcommand(tune_cmd)) {
      return cmd_tune(tuner_in);
    }
    if (app.got_subcommand(bound_cmd)) {
      return cmd_bound(rule, bound_in);
    }
    if (app.got_subcommand(diag_cmd)) {
      return cmd_diagnose(config_path, out_dir, ov);
    }
    if (app.got_subcommand(reproduce_cmd)) {
      return cmd_reproduce_fig1(out_dir, fig1_nodes, threads, fig1_seed);
    }
  } catch (const DivergenceError& e) {
    emit_error("divergence", e.what(), e.round());
    return kExitDiverged;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return kExitError;
  }
  return kExitError;
}
