"""Deterministic greedy repair of a rounded assignment."""

from __future__ import annotations

import numpy as np

from ..problem import ENERGY_RTOL, SECURITY_ATOL, Assignment, cell_costs, check
from ..system_model import Scenario
from .outcome import RepairFailed


def _admissible_options(scenario: Scenario, i: int, j: int) -> np.ndarray:
    tab = scenario.tables
    ok = (tab.security >= tab.requirement[j] - SECURITY_ATOL) & (tab.enc_cycles <= tab.budget[i])
    return np.flatnonzero(ok)


def _nearest_option(scenario: Scenario, i: int, j: int, g: int):
    """Closest admissible option, searching upwards from ``g`` first."""
    ok = _admissible_options(scenario, i, j)
    if ok.size == 0:
        return None
    up = ok[ok >= g]
    if up.size:
        return int(up[0])
    return int(ok[-1])


def repair(assignment: Assignment, scenario: Scenario, alpha: float, normalization: str = "cell") -> Assignment:
    """Make ``assignment`` feasible or raise :class:`RepairFailed`.

    1. per cell, move the option up the catalog until the O-RU's security
       requirement holds, or down until the compute budget holds;
    2. while an O-RU is over its resource blocks at some step, move the UE
       whose move to another O-RU with spare blocks costs least;
    3. while a UE exceeds its battery, downgrade the option of its most
       energy-hungry step, as far as the security requirement allows.

    A feasible input is returned unchanged.
    """
    if not check(assignment, scenario):
        return assignment
    tab = scenario.tables
    cost = cell_costs(scenario, alpha, normalization)
    oru = assignment.oru_of.copy()
    opt = assignment.option_of.copy()
    n, horizon = oru.shape

    for i in range(n):
        for t in range(horizon):
            g = _nearest_option(scenario, i, oru[i, t], opt[i, t])
            if g is None:
                raise RepairFailed(f"UE {i} at step {t}: no option meets both the security requirement "
                                   f"of O-RU {oru[i, t]} and the compute budget")
            opt[i, t] = g

    for t in range(horizon):
        while True:
            counts = np.bincount(oru[:, t], minlength=scenario.n_orus)
            over = np.flatnonzero(counts > tab.capacity)
            if over.size == 0:
                break
            j = int(over[0])
            best = None
            for i in np.flatnonzero(oru[:, t] == j):
                here = cost[i, t, j, opt[i, t]]
                for k in range(scenario.n_orus):
                    if k == j or counts[k] >= tab.capacity[k]:
                        continue
                    g = _nearest_option(scenario, int(i), k, opt[i, t])
                    if g is None:
                        continue
                    regret = cost[i, t, k, g] - here
                    if best is None or regret < best[0]:
                        best = (regret, int(i), k, g)
            if best is None:
                raise RepairFailed(f"O-RU {j} is over capacity at step {t} and no UE can move")
            _, i, k, g = best
            oru[i, t] = k
            opt[i, t] = g

    limits = tab.battery * (1.0 + ENERGY_RTOL)
    for i in range(n):
        while True:
            energy = tab.energy[i, np.arange(horizon), oru[i], opt[i]]
            if energy.sum() <= limits[i]:
                break
            moved = False
            for t in np.argsort(-energy, kind="stable"):
                ok = _admissible_options(scenario, i, oru[i, t])
                lower = [g for g in ok[ok < opt[i, t]] if tab.energy[i, t, oru[i, t], g] < energy[t]]
                if lower:
                    opt[i, t] = int(lower[-1])
                    moved = True
                    break
            if not moved:
                raise RepairFailed(f"UE {i} exceeds its battery even with the cheapest admissible options")

    repaired = Assignment(oru, opt)
    violations = check(repaired, scenario)
    if violations:
        raise RepairFailed("repair left violations: " + ", ".join(map(str, violations)))
    return repaired


__all__ = ["repair", "RepairFailed"]
