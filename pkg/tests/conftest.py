from dataclasses import replace

import numpy as np
import pytest

from oransec.scenario import GenParams, generate
from oransec.system_model import RadioUnit, Scenario, UserEquipment


def make_scenario(payloads, orus, rates, ue_clock=2e9, budget=2e7, battery=1e6, e_cp=4.0, e_comm=7.0):
    """Hand-built scenario: ``payloads[i]`` is the per-step payload tuple of UE i in bits,
    ``orus`` a list of (clock, W, M) and ``rates`` a scalar or an [i, j, t] array."""
    ues = tuple(UserEquipment(ue_clock, battery, budget, tuple(p)) for p in payloads)
    radios = tuple(RadioUnit(*o) for o in orus)
    horizon = len(payloads[0])
    rate = np.broadcast_to(np.asarray(rates, dtype=float), (len(ues), len(radios), horizon)).copy()
    return Scenario(ues, radios, horizon, rate, e_cp, e_comm)


@pytest.fixture
def desk_scenario():
    return generate(replace(GenParams(), n_ues=2, n_orus=2, horizon=2, seed=7))


@pytest.fixture
def default_scenario():
    return generate(replace(GenParams(), seed=1))


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if passed else 'FAIL'} {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
