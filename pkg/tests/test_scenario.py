import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oransec.crypto_cost import SECURITY_LEVELS
from oransec.problem import Assignment, check
from oransec.scenario import (RESOURCE_TIERS, GenParams, ScenarioFormatError, builtin, depletion_fixture, dumps,
                              generate, literal_unit_params, load, loads, save, scenario_to_dict, tier_params)
from oransec.solvers import solve_iterative
from oransec.system_model import BITS_PER_KB


def test_default_generator_is_valid():
    scen = generate(GenParams())
    assert (scen.n_ues, scen.n_orus, scen.horizon) == (4, 3, 3)
    assert all(ru.resource_blocks == 3 for ru in scen.orus)
    assert all(ru.security_requirement_bits in SECURITY_LEVELS for ru in scen.orus)
    assert scen.e_cp_watts == 4.0 and scen.e_comm_watts == 7.0
    for ue in scen.ues:
        assert 656 <= ue.compute_budget_cycles <= 1.7e7
        assert 1.8e9 <= ue.clock_hz <= 2.4e9 and 460 <= ue.battery_joules <= 2e6
        assert all(50 * BITS_PER_KB - 1 <= p <= 2e4 * BITS_PER_KB + 1 for p in ue.payload_bits)
    assert np.all((scen.rate_bps >= 10e6) & (scen.rate_bps <= 100e6))


def test_same_seed_same_bytes():
    assert dumps(generate(GenParams(seed=11))) == dumps(generate(GenParams(seed=11)))
    assert dumps(generate(GenParams(seed=11))) != dumps(generate(GenParams(seed=12)))


def test_degenerate_w_range():
    scen = generate(replace(GenParams(), w_range=(6.0, 6.0), n_orus=5))
    assert all(ru.security_requirement_bits == 6.0 for ru in scen.orus)


def test_continuous_w_behind_flag():
    scen = generate(replace(GenParams(), snap_w=False, n_orus=5))
    assert any(ru.security_requirement_bits not in SECURITY_LEVELS for ru in scen.orus)


def test_adding_a_ue_keeps_other_draws():
    small = generate(replace(GenParams(), n_ues=3))
    large = generate(replace(GenParams(), n_ues=4))
    assert large.ues[:3] == small.ues and large.orus == small.orus
    assert np.array_equal(large.rate_bps[:3], small.rate_bps)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4), st.integers(1, 4))
def test_round_trip(seed, n_ues, n_orus, horizon):
    scen = generate(replace(GenParams(), seed=seed, n_ues=n_ues, n_orus=n_orus, horizon=horizon))
    assert loads(dumps(scen)) == scen
    assert dumps(loads(dumps(scen))) == dumps(scen)


def test_save_and_load(tmp_path):
    scen = generate(GenParams(seed=2))
    path = tmp_path / "s.json"
    save(scen, path)
    assert load(path) == scen


def _doc(**edit):
    data = scenario_to_dict(generate(replace(GenParams(), n_ues=1, n_orus=1, horizon=1)))
    for path, value in edit.items():
        target = data
        *head, last = path.split("__")
        for part in head:
            target = target[int(part)] if part.isdigit() else target[part]
        target[int(last) if last.isdigit() else last] = value
    return json.dumps(data)


def test_negative_clock_names_field():
    with pytest.raises(ScenarioFormatError) as err:
        loads(_doc(ues__0__clock_hz=-1.0))
    assert "clock_hz" in err.value.field


def test_requirement_above_catalog_rejected():
    with pytest.raises(ScenarioFormatError) as err:
        loads(_doc(orus__0__security_requirement_bits=13.0))
    assert "security_requirement_bits" in err.value.field


@pytest.mark.parametrize("edit,field", [
    (dict(schema_version=99), "schema_version"),
    (dict(orus__0__resource_blocks=1.5), "resource_blocks"),
    (dict(rate_bps=[[[0.0]]]), "rate_bps"),
])
def test_other_format_errors(edit, field):
    with pytest.raises(ScenarioFormatError) as err:
        loads(_doc(**edit))
    assert field in err.value.field


def test_payload_in_kb_accepted():
    data = json.loads(_doc())
    del data["ues"][0]["payload_bits"]
    data["ues"][0]["payload_kb"] = [2.0]
    assert loads(json.dumps(data)).ues[0].payload_bits == (2 * BITS_PER_KB,)


def test_invalid_json():
    with pytest.raises(ScenarioFormatError):
        loads("{not json")


def test_uniform_means_within_two_percent():
    # 10^4 independent entities per parameter
    ue_side = generate(replace(GenParams(), n_ues=10_000, n_orus=1, horizon=1, seed=5))
    oru_side = generate(replace(GenParams(), n_ues=1, n_orus=10_000, horizon=1, seed=5, snap_w=False))
    p = GenParams()
    samples = {
        "ue_clock_range_hz": [u.clock_hz for u in ue_side.ues],
        "battery_range_j": [u.battery_joules for u in ue_side.ues],
        "budget_range_cycles": [u.compute_budget_cycles for u in ue_side.ues],
        "payload_range_kb": [u.payload_bits[0] / BITS_PER_KB for u in ue_side.ues],
        "rate_range_bps": ue_side.rate_bps.ravel(),
        "oru_clock_range_hz": [r.clock_hz for r in oru_side.orus],
        "w_range": [r.security_requirement_bits for r in oru_side.orus],
    }
    for name, values in samples.items():
        lo, hi = getattr(p, name)
        assert np.mean(values) == pytest.approx((lo + hi) / 2, rel=0.02), name


def test_tiers_change_only_budget_and_battery():
    base = GenParams(seed=4)
    low, high = generate(tier_params(base, "low")), generate(tier_params(base, "high"))
    assert low.orus == high.orus and np.array_equal(low.rate_bps, high.rate_bps)
    for a, b in zip(low.ues, high.ues):
        assert a.payload_bits == b.payload_bits and a.clock_hz == b.clock_hz
        assert a.compute_budget_cycles < 6168 and b.compute_budget_cycles >= 1.7e7
    with pytest.raises(ValueError):
        tier_params(base, "extreme")
    assert set(RESOURCE_TIERS) == {"low", "medium", "high"}


def test_literal_unit_rates_exhaust_every_battery():
    # even the cheapest option on the fastest link costs more than the battery allows
    for seed in range(10):
        scen = generate(replace(literal_unit_params(), seed=seed))
        tab = scen.tables
        cheapest = tab.energy.min(axis=(2, 3)).sum(axis=1)
        assert np.any(cheapest > tab.battery)
        assert not solve_iterative(scen, 0.5).feasible


def test_depletion_fixture_shape():
    scen = depletion_fixture()
    assert builtin("depletion") == scen and builtin("missing") is None
    assert (scen.n_ues, scen.n_orus, scen.horizon) == (2, 1, 4)
    assert check(Assignment.uniform(2, 4), scen) == []
