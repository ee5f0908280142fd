import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oransec.problem import (Assignment, ViolationKind, cell_costs, check, normalization_bounds, objective,
                             ue_energy)
from oransec.scenario import GenParams, generate
from oransec.system_model import Scenario, total_latency

from conftest import make_scenario

RSA4096 = 7


def test_des_meets_requirement_6_with_equality():
    scen = make_scenario([(64,)], [(3.7e9, 6.0, 1)], 1e6)
    assert check(Assignment.uniform(1, 1, 0, 0), scen) == []


def test_resource_block_violation():
    scen = make_scenario([(64,)] * 4, [(3.7e9, 6.0, 3)], 1e6)
    violations = check(Assignment.uniform(4, 1), scen)
    assert len(violations) == 1
    v = violations[0]
    assert v.kind is ViolationKind.RESOURCE_BLOCKS and v.subject == ("oru", 0) and v.step == 0 and v.slack == -1


def test_compute_budget_violation():
    scen = make_scenario([(128,)], [(3.7e9, 6.0, 1)], 1e6, budget=656)
    violations = check(Assignment.uniform(1, 1, 0, 1), scen)
    assert [(v.kind, v.slack) for v in violations] == [(ViolationKind.COMPUTE_BUDGET, -5512)]


def test_security_and_battery_violations():
    scen = make_scenario([(10**6,)], [(3.7e9, 12.0, 1)], 1e3, battery=1.0)
    kinds = {v.kind for v in check(Assignment.uniform(1, 1, 0, 0), scen)}
    assert kinds == {ViolationKind.SECURITY_REQUIREMENT, ViolationKind.BATTERY}


def test_shape_mismatch_rejected():
    scen = make_scenario([(64,)], [(3.7e9, 6.0, 1)], 1e6)
    with pytest.raises(ValueError):
        check(Assignment.uniform(2, 1), scen)
    with pytest.raises(ValueError):
        check(Assignment.uniform(1, 1, 1, 0), scen)


def test_s_max_is_12(default_scenario):
    assert normalization_bounds(default_scenario)[0] == 12.0


def test_l_max_is_rsa4096_latency():
    scen = make_scenario([(64,)], [(656.0, 6.0, 1)], 64.0, ue_clock=656.0)
    _, l_max = normalization_bounds(scen)
    assert l_max[0, 0] == total_latency(scen, 0, 0, RSA4096, 0)
    assert l_max[0, 0] == pytest.approx(2 * 16777216 / 656 + 4096 / 64, rel=1e-12)


def test_zero_payload_cell_normalizes_to_zero():
    scen = make_scenario([(0, 64)], [(656.0, 6.0, 1)], 64.0, ue_clock=656.0)
    _, l_max = normalization_bounds(scen)
    assert l_max[0, 0] == 0.0
    rep = objective(Assignment.uniform(1, 2), scen, 1.0)
    assert rep.norm_latency[0, 0] == 0.0 and rep.norm_latency[0, 1] > 0.0


def test_hand_evaluated_objective():
    # DES latency 3 s against the RSA-4096 bound; security deficit 1 - 6/12
    scen = make_scenario([(64,)], [(656.0, 6.0, 1)], 64.0, ue_clock=656.0)
    l_max = 2 * 16777216 / 656 + 4096 / 64
    rep = objective(Assignment.uniform(1, 1), scen, 0.5)
    assert rep.total == pytest.approx(0.5 * 0.5 + 0.5 * 3.0 / l_max, rel=1e-12)


def test_alpha_one_is_latency_only(default_scenario):
    a = Assignment.uniform(default_scenario.n_ues, default_scenario.horizon, 0, 3)
    rep = objective(a, default_scenario, 1.0)
    assert rep.total == rep.latency_term


def test_alpha_zero_all_rsa4096_has_no_security_deficit(default_scenario):
    a = Assignment.uniform(default_scenario.n_ues, default_scenario.horizon, 0, RSA4096)
    assert objective(a, default_scenario, 0.0).security_term == 0.0


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_alpha_out_of_range(default_scenario, alpha):
    with pytest.raises(ValueError):
        objective(Assignment.uniform(4, 3), default_scenario, alpha)


def test_global_normalization_differs(default_scenario):
    _, cell = normalization_bounds(default_scenario, "cell")
    _, glob = normalization_bounds(default_scenario, "global")
    assert np.all(glob >= cell) and np.ptp(glob) == 0.0
    with pytest.raises(ValueError):
        normalization_bounds(default_scenario, "bogus")


def test_cell_costs_agree_with_objective(default_scenario):
    scen = default_scenario
    rng = np.random.default_rng(0)
    a = Assignment(rng.integers(0, scen.n_orus, (4, 3)), rng.integers(0, 8, (4, 3)))
    cost = cell_costs(scen, 0.3)
    ii, tt = np.meshgrid(range(4), range(3), indexing="ij")
    assert cost[ii, tt, a.oru_of, a.option_of].sum() == pytest.approx(objective(a, scen, 0.3).total, rel=1e-12)


def test_assignment_round_trip():
    a = Assignment(np.array([[0, 1]]), np.array([[2, 7]]))
    assert Assignment.from_dict(a.to_dict()) == a and hash(Assignment.from_dict(a.to_dict())) == hash(a)


def random_case(seed, n_ues=3, n_orus=2, horizon=2):
    from dataclasses import replace
    scen = generate(replace(GenParams(), n_ues=n_ues, n_orus=n_orus, horizon=horizon, seed=seed))
    rng = np.random.default_rng(seed)
    a = Assignment(rng.integers(0, n_orus, (n_ues, horizon)), rng.integers(0, 8, (n_ues, horizon)))
    return scen, a


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1), st.permutations(range(3)))
def test_relabel_invariance(seed, alpha, perm):
    scen, a = random_case(seed)
    perm = np.array(perm)
    moved = Scenario(tuple(scen.ues[k] for k in perm), scen.orus, scen.horizon, scen.rate_bps[perm],
                     scen.e_cp_watts, scen.e_comm_watts, scen.cycle_costs)
    b = Assignment(a.oru_of[perm], a.option_of[perm])
    assert objective(b, moved, alpha).total == pytest.approx(objective(a, scen, alpha).total, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_total_is_affine_in_alpha(seed, alpha):
    scen, a = random_case(seed)
    f0 = objective(a, scen, 0.0).total
    f1 = objective(a, scen, 1.0).total
    assert objective(a, scen, alpha).total == pytest.approx(f0 + alpha * (f1 - f0), rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2), st.integers(0, 1), st.integers(0, 6))
def test_larger_key_never_lowers_normalized_security(seed, i, t, g):
    scen, a = random_case(seed)
    opt = a.option_of.copy()
    opt[i, t] = g
    low = objective(Assignment(a.oru_of, opt), scen, 0.0)
    opt[i, t] = g + 1
    high = objective(Assignment(a.oru_of, opt), scen, 0.0)
    assert high.norm_security[i, t] > low.norm_security[i, t]
    assert high.security_term < low.security_term


def test_ue_energy_shape(desk_scenario):
    e = ue_energy(Assignment.uniform(2, 2), desk_scenario)
    assert e.shape == (2, 2) and np.all(e > 0)
