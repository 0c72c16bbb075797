// Python bindings for the local-SGD simulator and theory toolkit. Exposes the
// core operations (problem construction, simulation, bounds, tuners,
// diagnostics) with Eigen vectors/matrices mapped to numpy arrays.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "localopt/diagnostics.hpp"
#include "localopt/engine.hpp"
#include "localopt/harness.hpp"
#include "localopt/problems.hpp"
#include "localopt/theory.hpp"
#include "localopt/tuner.hpp"

namespace py = pybind11;
using namespace localopt;

namespace {

OuterKind outer_kind_from_string(const std::string& name) {
  return outer_kind_from_name(name);
}

}  // namespace

PYBIND11_MODULE(_localopt, m) {
  m.doc() =
      "Deterministic simulator and theory toolkit for local SGD with "
      "server-side outer optimizers";

  py::register_exception<DivergenceError>(m, "DivergenceError",
                                          PyExc_RuntimeError);

  py::enum_<NoiseScaling>(m, "NoiseScaling")
      .value("total", NoiseScaling::kTotal)
      .value("per_coord", NoiseScaling::kPerCoord);

  py::enum_<OuterKind>(m, "OuterKind")
      .value("plain", OuterKind::kPlain)
      .value("momentum", OuterKind::kMomentum)
      .value("nesterov", OuterKind::kNesterov)
      .value("schedule_free", OuterKind::kScheduleFree);

  py::enum_<RecordLevel>(m, "RecordLevel")
      .value("round", RecordLevel::kRound)
      .value("step", RecordLevel::kStep);

  py::class_<QuadraticProblem>(m, "QuadraticProblem")
      .def_readonly("hessian", &QuadraticProblem::hessian)
      .def_readonly("x_star", &QuadraticProblem::x_star)
      .def_readonly("smoothness", &QuadraticProblem::smoothness)
      .def_property_readonly("dim", &QuadraticProblem::dim)
      .def("loss", &QuadraticProblem::loss, py::arg("x"))
      .def("gradient", &QuadraticProblem::gradient, py::arg("x"));

  m.def("make_quadratic", &make_quadratic, py::arg("hessian"),
        py::arg("x_star"),
        "Quadratic problem from an explicit Hessian and minimizer");
  m.def("make_random_quadratic", &make_random_quadratic, py::arg("dim"),
        py::arg("seed"), py::arg("ridge") = kDefaultRidge,
        "Seeded random Gram-matrix quadratic (plus ridge)");
  m.def("expected_round_map", &expected_round_map, py::arg("hessian"),
        py::arg("eta"), py::arg("gamma"), py::arg("local_steps"),
        "Exact one-round expected-iterate map (1-g)I + g(I - eta Q)^H");

  py::class_<OuterSpec>(m, "OuterSpec")
      .def(py::init<>())
      .def_readwrite("kind", &OuterSpec::kind)
      .def_readwrite("gamma", &OuterSpec::gamma)
      .def_readwrite("mu", &OuterSpec::mu)
      .def_readwrite("beta", &OuterSpec::beta);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("nodes", &RunConfig::nodes)
      .def_readwrite("local_steps", &RunConfig::local_steps)
      .def_readwrite("rounds", &RunConfig::rounds)
      .def_readwrite("eta", &RunConfig::eta)
      .def_readwrite("sigma", &RunConfig::sigma)
      .def_readwrite("noise_scaling", &RunConfig::noise_scaling)
      .def_readwrite("outer", &RunConfig::outer)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("record_level", &RunConfig::record_level)
      .def_readwrite("x0", &RunConfig::x0);

  py::class_<RoundTrace>(m, "RoundTrace")
      .def_readonly("round", &RoundTrace::round)
      .def_readonly("loss_x", &RoundTrace::loss_x)
      .def_readonly("loss_avg", &RoundTrace::loss_avg)
      .def_readonly("dist_sq", &RoundTrace::dist_sq)
      .def_readonly("delta_norm", &RoundTrace::delta_norm)
      .def_readonly("drift_max", &RoundTrace::drift_max)
      .def_readonly("g1_sq_sum", &RoundTrace::g1_sq_sum)
      .def_readonly("g2_sq_sum", &RoundTrace::g2_sq_sum)
      .def_readonly("cos_sim_mean", &RoundTrace::cos_sim_mean);

  py::class_<OuterState>(m, "OuterState")
      .def_readonly("x", &OuterState::x)
      .def_readonly("round", &OuterState::round)
      .def_readonly("u", &OuterState::u)
      .def_readonly("z", &OuterState::z);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("final_state", &RunResult::final_state)
      .def_readonly("avg_iterate", &RunResult::avg_iterate)
      .def_readonly("avg_local_loss", &RunResult::avg_local_loss)
      .def_readonly("traces", &RunResult::traces)
      .def_property_readonly("final_x", [](const RunResult& r) {
        return r.final_state.x;
      });

  m.def("run", &run, py::arg("problem"), py::arg("config"),
        "Simulate local SGD with the configured outer rule",
        py::call_guard<py::gil_scoped_release>());

  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def_readwrite("dist0", &BoundInputs::dist0)
      .def_readwrite("smoothness", &BoundInputs::smoothness)
      .def_readwrite("sigma", &BoundInputs::sigma)
      .def_readwrite("nodes", &BoundInputs::nodes)
      .def_readwrite("local_steps", &BoundInputs::local_steps)
      .def_readwrite("rounds", &BoundInputs::rounds)
      .def_readwrite("eta", &BoundInputs::eta)
      .def_readwrite("gamma", &BoundInputs::gamma)
      .def_readwrite("mu", &BoundInputs::mu);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("value", &BoundReport::value)
      .def_readonly("stepsize_ok", &BoundReport::stepsize_ok)
      .def_readonly("terms", &BoundReport::terms);

  m.def("plain_rate_bound", &plain_rate_bound, py::arg("inputs"));
  m.def("momentum_rate_bound", &momentum_rate_bound, py::arg("inputs"));
  m.def("accelerated_rate_bound", &accelerated_rate_bound, py::arg("inputs"));
  m.def("accelerated_tuned_eta", &accelerated_tuned_eta, py::arg("inputs"));

  py::enum_<TradeoffCase>(m, "TradeoffCase")
      .value("sqrt_sum", TradeoffCase::kSqrtSum)
      .value("sqrt_diff", TradeoffCase::kSqrtDiff)
      .value("one", TradeoffCase::kOne);

  py::class_<TradeoffResult>(m, "TradeoffResult")
      .def_readonly("x", &TradeoffResult::x)
      .def_readonly("which", &TradeoffResult::which);

  m.def("gamma_tradeoff_argmin", &gamma_tradeoff_argmin, py::arg("a"),
        py::arg("b"), py::arg("c"),
        "Minimizer over x>0 of a/x + b x + c |1-x|");

  py::class_<DataTerms>(m, "DataTerms")
      .def_readonly("opt", &DataTerms::opt)
      .def_readonly("grad_energy", &DataTerms::grad_energy)
      .def_readonly("noise", &DataTerms::noise)
      .def_readonly("gamma_gap", &DataTerms::gamma_gap)
      .def_readonly("drift", &DataTerms::drift)
      .def_readonly("noise_cross", &DataTerms::noise_cross)
      .def_readonly("total", &DataTerms::total);

  m.def("data_dependent_terms", &data_dependent_terms, py::arg("result"),
        py::arg("dist0"), py::arg("iota") = 1.0);

  py::class_<GammaRecommendation>(m, "GammaRecommendation")
      .def_readonly("gamma", &GammaRecommendation::gamma)
      .def_readonly("a", &GammaRecommendation::a)
      .def_readonly("b", &GammaRecommendation::b)
      .def_readonly("c", &GammaRecommendation::c)
      .def_readonly("g1_sq", &GammaRecommendation::g1_sq)
      .def_readonly("g2_sq", &GammaRecommendation::g2_sq)
      .def_readonly("regime", &GammaRecommendation::regime);

  m.def("recommend_gamma", &recommend_gamma, py::arg("result"),
        py::arg("dist0"));

  py::class_<TunerInputs>(m, "TunerInputs")
      .def(py::init<>())
      .def_readwrite("dist0", &TunerInputs::dist0)
      .def_readwrite("smoothness", &TunerInputs::smoothness)
      .def_readwrite("sigma", &TunerInputs::sigma)
      .def_readwrite("nodes", &TunerInputs::nodes)
      .def_readwrite("local_steps", &TunerInputs::local_steps)
      .def_readwrite("rounds", &TunerInputs::rounds);

  py::class_<TunerCandidate>(m, "TunerCandidate")
      .def_readonly("feasible", &TunerCandidate::feasible)
      .def_readonly("eta", &TunerCandidate::eta)
      .def_readonly("gamma", &TunerCandidate::gamma)
      .def_readonly("objective", &TunerCandidate::objective)
      .def_readonly("residual", &TunerCandidate::residual)
      .def_readonly("reason", &TunerCandidate::reason);

  py::class_<TunerResult>(m, "TunerResult")
      .def_readonly("a", &TunerResult::a)
      .def_readonly("b", &TunerResult::b)
      .def_readonly("limit", &TunerResult::limit)
      .def_readonly("winner", &TunerResult::winner)
      .def_readonly("eta", &TunerResult::eta)
      .def_readonly("gamma", &TunerResult::gamma)
      .def_readonly("objective", &TunerResult::objective);

  m.def("tune", &tune, py::arg("inputs"),
        "Best closed-form (eta, gamma) for the plain rule");
  m.def("tuning_objective", &tuning_objective, py::arg("inputs"),
        py::arg("eta"), py::arg("gamma"));
  m.def("tuning_feasible", &tuning_feasible, py::arg("inputs"),
        py::arg("eta"), py::arg("gamma"));

  py::class_<GradientStats>(m, "GradientStats")
      .def_readonly("g1_rms", &GradientStats::g1_rms)
      .def_readonly("g2_rms", &GradientStats::g2_rms);

  m.def("gradient_stats", &gradient_stats, py::arg("result"));

  m.def("outer_kind", &outer_kind_from_string, py::arg("name"),
        "Parse an outer-rule name (plain, momentum, nesterov, schedule_free)");
}
