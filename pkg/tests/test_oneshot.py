from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oransec.problem import check
from oransec.scenario import GenParams, generate
from oransec.solvers import OneShotConfig, RelaxedProblem, Status, solve_exhaustive, solve_oneshot

from conftest import make_scenario


@pytest.mark.parametrize("mu", [0.0, 1.0, 100.0])
def test_gradient_matches_finite_differences(desk_scenario, mu):
    prob = RelaxedProblem(desk_scenario, 0.6, 1e-2)
    rng = np.random.default_rng(3)
    za, zx = prob.start()
    za = za + 0.3 * rng.standard_normal(za.shape) * prob.a_mask
    zx = zx + 0.3 * rng.standard_normal(zx.shape) * prob.x_mask
    _, ga, gx = prob.value_and_grad(za, zx, mu)
    h = 1e-6
    for grad, z, is_a in ((ga, za, True), (gx, zx, False)):
        for idx in zip(*np.nonzero((prob.a_mask if is_a else prob.x_mask) > 0)):
            plus, minus = z.copy(), z.copy()
            plus[idx] += h
            minus[idx] -= h
            args_p = (plus, zx) if is_a else (za, plus)
            args_m = (minus, zx) if is_a else (za, minus)
            fd = (prob.value_and_grad(*args_p, mu)[0] - prob.value_and_grad(*args_m, mu)[0]) / (2 * h)
            assert grad[idx] == pytest.approx(fd, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_singleton_matches_exhaustive(seed):
    scen = generate(replace(GenParams(), n_ues=1, n_orus=1, horizon=1, seed=seed))
    ex, os_ = solve_exhaustive(scen, 0.5), solve_oneshot(scen, 0.5)
    assert ex.feasible == os_.feasible
    if ex.feasible:
        assert os_.total == pytest.approx(ex.total, rel=1e-9)


def test_latency_falls_with_alpha(default_scenario):
    low, high = solve_oneshot(default_scenario, 0.1), solve_oneshot(default_scenario, 0.9)
    assert high.report.latency_term <= low.report.latency_term


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_feasible_outputs_pass_check_and_exhaustive_dominates(seed, alpha):
    scen = generate(replace(GenParams(), n_ues=2, n_orus=2, horizon=2, seed=seed))
    out = solve_oneshot(scen, alpha)
    if out.feasible:
        assert check(out.assignment, scen) == []
        assert solve_exhaustive(scen, alpha).total <= out.total + 1e-9 * max(1.0, out.total)


def test_unreachable_requirement_reported():
    scen = make_scenario([(64,)], [(3.7e9, 12.0, 1)], 1e6, budget=656)
    out = solve_oneshot(scen, 0.5)
    assert out.status is Status.INFEASIBLE and "security requirement" in out.diagnostic


def test_floor_rounding_never_returns_infeasible_assignment(default_scenario):
    out = solve_oneshot(default_scenario, 0.5, OneShotConfig(rounding="floor"))
    if out.feasible:
        assert check(out.assignment, default_scenario) == []
    else:
        assert out.violations and out.partial is not None


def test_trace_ends_with_discrete_value(default_scenario):
    out = solve_oneshot(default_scenario, 0.5)
    assert out.trace[-1].block == "discrete" and out.trace[-1].objective == out.total
    assert len(out.trace) == OneShotConfig().penalty_stages + 1


def test_deterministic(default_scenario):
    a, b = solve_oneshot(default_scenario, 0.7), solve_oneshot(default_scenario, 0.7)
    assert a.assignment == b.assignment and a.trace == b.trace


@pytest.mark.parametrize("kwargs", [dict(epsilon_pair=0.0), dict(rounding="ceil"), dict(penalty_stages=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OneShotConfig(**kwargs)


def test_alpha_validation(default_scenario):
    with pytest.raises(ValueError):
        solve_oneshot(default_scenario, 1.2)
