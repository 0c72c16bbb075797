"""Smoke tests for the Python bindings: every exposed operation is callable
and agrees with basic invariants. Heavier numerical checks live in the C++
suites; these only prove the binding layer is wired correctly."""

import math

import numpy as np
import pytest

import localopt as lo


def make_problem(dim=6, seed=3):
    return lo.make_random_quadratic(dim, seed)


def test_problem_roundtrip():
    p = make_problem()
    assert p.dim == 6
    assert p.smoothness > 0
    h = np.asarray(p.hessian)
    assert h.shape == (6, 6)
    assert np.allclose(h, h.T)
    x = np.asarray(p.x_star)
    assert p.loss(x) == 0.0
    assert np.allclose(p.gradient(x), np.zeros(6))
    # Same seed, same problem, bit for bit.
    q = make_problem()
    assert np.array_equal(np.asarray(p.hessian), np.asarray(q.hessian))


def test_explicit_problem_and_map():
    hessian = np.diag([1.0, 4.0])
    x_star = np.array([1.0, -1.0])
    p = lo.make_quadratic(hessian, x_star)
    assert p.loss(np.array([2.0, 0.0])) == pytest.approx(2.5)
    m = np.asarray(lo.expected_round_map(hessian, 0.1, 2.0, 2))
    assert m[0, 0] == pytest.approx(0.62, abs=1e-14)
    assert m[1, 1] == pytest.approx(-0.28, abs=1e-14)


def test_run_deterministic_and_converges():
    p = make_problem()
    cfg = lo.RunConfig()
    cfg.nodes = 3
    cfg.local_steps = 4
    cfg.rounds = 60
    cfg.eta = 0.2 / p.smoothness
    cfg.sigma = 0.1
    cfg.outer.kind = lo.OuterKind.plain
    cfg.outer.gamma = 1.0
    cfg.seed = 7
    res1 = lo.run(p, cfg)
    res2 = lo.run(p, cfg)
    assert np.array_equal(np.asarray(res1.final_x), np.asarray(res2.final_x))
    assert len(res1.traces) == 60
    assert res1.traces[-1].loss_x < res1.traces[0].loss_x
    assert res1.avg_local_loss > 0

    cfg.seed = 8
    res3 = lo.run(p, cfg)
    assert not np.array_equal(np.asarray(res1.final_x), np.asarray(res3.final_x))


def test_outer_rules_and_divergence():
    p = make_problem()
    cfg = lo.RunConfig()
    cfg.rounds = 10
    cfg.eta = 0.2 / p.smoothness
    cfg.outer.kind = lo.OuterKind.nesterov
    res = lo.run(p, cfg)
    assert np.asarray(res.final_state.u).shape == (6,)

    bad = lo.RunConfig()
    bad.rounds = 500
    bad.eta = 3.0 / p.smoothness
    with pytest.raises(RuntimeError):
        lo.run(p, bad)


def test_bounds_and_terms():
    inputs = lo.BoundInputs()
    inputs.dist0 = 1.0
    inputs.smoothness = 1.0
    inputs.sigma = 1.0
    inputs.nodes = 2
    inputs.local_steps = 4
    inputs.rounds = 8
    inputs.eta = 0.05
    inputs.gamma = 1.0
    rep = lo.plain_rate_bound(inputs)
    assert rep.stepsize_ok
    names = [name for name, _ in rep.terms]
    assert names == ["optimization", "drift", "noise"]
    assert rep.value == pytest.approx(sum(v for _, v in rep.terms))
    assert lo.momentum_rate_bound(inputs).value == pytest.approx(2 * rep.value)
    assert lo.accelerated_rate_bound(inputs).stepsize_ok
    assert 0 < lo.accelerated_tuned_eta(inputs) <= 0.5


def test_tuner_and_tradeoff():
    t = lo.TunerInputs()
    t.dist0 = 2.0
    t.smoothness = 1.0
    t.sigma = 0.2
    t.nodes = 8
    t.local_steps = 16
    t.rounds = 500
    res = lo.tune(t)
    assert res.winner in (0, 1, 2)
    assert lo.tuning_feasible(t, res.eta, res.gamma)
    assert res.objective == pytest.approx(
        lo.tuning_objective(t, res.eta, res.gamma)
    )

    tr = lo.gamma_tradeoff_argmin(4.0, 1.0, 0.0)
    assert tr.x == pytest.approx(2.0)
    assert tr.which == lo.TradeoffCase.sqrt_sum
    with pytest.raises(ValueError):
        lo.gamma_tradeoff_argmin(0.0, 0.0, 0.0)


def test_diagnostics_and_recommendation():
    p = make_problem()
    cfg = lo.RunConfig()
    cfg.nodes = 4
    cfg.local_steps = 5
    cfg.rounds = 40
    cfg.eta = 0.1 / p.smoothness
    cfg.sigma = 1.0
    cfg.seed = 5
    cfg.record_level = lo.RecordLevel.step
    res = lo.run(p, cfg)

    gs = lo.gradient_stats(res)
    assert 0 < gs.g1_rms <= gs.g2_rms * (1 + 1e-12)

    dist0 = float(np.linalg.norm(np.asarray(p.x_star)))
    terms = lo.data_dependent_terms(res, dist0)
    assert terms.total == pytest.approx(
        terms.opt
        + terms.grad_energy
        + terms.noise
        + terms.gamma_gap
        + terms.drift
        + terms.noise_cross
    )

    rec = lo.recommend_gamma(res, dist0)
    assert rec.gamma > 0
    assert rec.regime in (
        "noise_dominated",
        "balanced",
        "optimization_dominated",
    )
    assert math.isfinite(rec.a) and math.isfinite(rec.b) and math.isfinite(rec.c)


def test_x0_and_noise_scaling():
    p = make_problem()
    cfg = lo.RunConfig()
    cfg.rounds = 5
    cfg.eta = 0.1 / p.smoothness
    cfg.x0 = np.asarray(p.x_star)
    res = lo.run(p, cfg)
    assert res.traces[-1].loss_x == 0.0

    cfg2 = lo.RunConfig()
    cfg2.rounds = 5
    cfg2.eta = 0.1 / p.smoothness
    cfg2.sigma = 1.0
    cfg2.noise_scaling = lo.NoiseScaling.per_coord
    res2 = lo.run(p, cfg2)
    assert len(res2.traces) == 5

    assert lo.outer_kind("momentum") == lo.OuterKind.momentum
    with pytest.raises(Exception):
        lo.outer_kind("bogus")
