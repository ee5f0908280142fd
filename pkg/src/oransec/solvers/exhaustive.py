"""Exhaustive search over every assignment.

The enumeration is organised per UE: each UE's trajectories (one
(O-RU, option) pair per step) are enumerated and screened against the
constraints that involve that UE alone (security requirement, compute
budget, battery). Surviving trajectories are then combined across UEs with
the resource-block check applied as UEs are added. The result is the same
as scoring every assignment and discarding those :func:`~oransec.problem.check`
rejects, at a fraction of the cost.
"""

from __future__ import annotations

import time

import numpy as np

from ..problem import (ENERGY_RTOL, Assignment, cell_admissible, cell_costs, check, objective)
from ..system_model import Scenario
from .outcome import SearchSpaceTooLarge, SolveOutcome, Status, TraceRecord

DEFAULT_CEILING = 10**8
_CHUNK = 1 << 21
_TIE_RTOL = 1e-12


def search_space_size(n_orus: int, n_ues: int, steps: int, n_options: int = 8) -> int:
    return (n_orus * n_options) ** (n_ues * steps)


class _Trajectories:
    """Admissible per-step choices of one UE over a block of steps."""

    def __init__(self, cost, energy, admissible, limit):
        steps, n_orus, n_opts = cost.shape
        flat_cost = cost.reshape(steps, -1)
        flat_energy = energy.reshape(steps, -1)
        flat_adm = admissible.reshape(steps, -1)
        choices = [np.flatnonzero(flat_adm[s]) for s in range(steps)]
        if any(c.size == 0 for c in choices):
            self.choice = np.empty((0, steps), dtype=np.int64)
        else:
            grids = np.meshgrid(*choices, indexing="ij")
            self.choice = np.stack([g.ravel() for g in grids], axis=1)
        rows = np.arange(steps)
        self.cost = flat_cost[rows, self.choice].sum(axis=1) if self.choice.size else np.empty(0)
        used = flat_energy[rows, self.choice].sum(axis=1) if self.choice.size else np.empty(0)
        keep = used <= limit
        self.choice = self.choice[keep]
        self.cost = self.cost[keep]
        self.oru = self.choice // n_opts
        self.option = self.choice % n_opts
        usage = np.zeros((len(self.choice), steps * n_orus), dtype=np.int16)
        for s in range(steps):
            usage[np.arange(len(self.choice)), s * n_orus + self.oru[:, s]] = 1
        self.usage = usage

    def __len__(self):
        return len(self.choice)


def _search(cost, energy, admissible, capacity, limits):
    """Exact minimiser over a block of steps.

    Arrays are indexed [i, s, j, g] over the steps of the block. Returns
    ``((oru [i, s], option [i, s], cost), evaluations)``, with ``None`` in
    place of the first element when no candidate is feasible.
    """
    n_ues, steps, n_orus, _ = cost.shape
    parts = [_Trajectories(cost[i], energy[i], admissible[i], limits[i]) for i in range(n_ues)]
    evaluations = 0
    if any(len(p) == 0 for p in parts):
        return None, evaluations
    cap = np.tile(capacity, steps)

    acc_cost = np.zeros(1)
    acc_use = np.zeros((1, steps * n_orus), dtype=np.int16)
    acc_idx = np.zeros((1, 0), dtype=np.int64)
    for k in range(n_ues - 1):
        part = parts[k]
        use = acc_use[:, None, :] + part.usage[None, :, :]
        ok = np.all(use <= cap, axis=2)
        a, b = np.nonzero(ok)
        acc_cost = acc_cost[a] + part.cost[b]
        acc_use = use[a, b]
        acc_idx = np.concatenate([acc_idx[a], b[:, None]], axis=1)
        if acc_cost.size == 0:
            return None, evaluations

    last = parts[-1]
    rows_per_chunk = max(1, _CHUNK // len(last))
    best = []  # (chunk minimum, lexicographic key, full index row)
    for start in range(0, len(acc_cost), rows_per_chunk):
        stop = min(start + rows_per_chunk, len(acc_cost))
        use = acc_use[start:stop, None, :] + last.usage[None, :, :]
        ok = np.all(use <= cap, axis=2)
        total = acc_cost[start:stop, None] + last.cost[None, :]
        evaluations += int(ok.sum())
        if not ok.any():
            continue
        total = np.where(ok, total, np.inf)
        lo = total.min()
        a, b = np.nonzero(total <= lo + _TIE_RTOL * max(1.0, abs(lo)))
        idx = np.concatenate([acc_idx[start + a], b[:, None]], axis=1)
        key = _keys(parts, idx)
        first = np.lexsort(key.T[::-1])[0]
        best.append((float(lo), tuple(key[first].tolist()), idx[first]))

    if not best:
        return None, evaluations
    lo = min(b[0] for b in best)
    tied = [b for b in best if b[0] <= lo + _TIE_RTOL * max(1.0, abs(lo))]
    _, _, idx = min(tied, key=lambda b: b[1])
    oru = np.stack([parts[i].oru[idx[i]] for i in range(n_ues)])
    opt = np.stack([parts[i].option[idx[i]] for i in range(n_ues)])
    return (oru, opt, lo), evaluations


def _keys(parts, idx):
    oru = np.concatenate([parts[i].oru[idx[:, i]] for i in range(len(parts))], axis=1)
    opt = np.concatenate([parts[i].option[idx[:, i]] for i in range(len(parts))], axis=1)
    return np.concatenate([oru, opt], axis=1).astype(np.int16)


def _limits(scenario: Scenario) -> np.ndarray:
    return scenario.tables.battery * (1.0 + ENERGY_RTOL)


def solve_exhaustive(scenario: Scenario, alpha: float, *, ceiling: int = DEFAULT_CEILING,
                     normalization: str = "cell") -> SolveOutcome:
    """Global optimum over the whole horizon (ties broken lexicographically)."""
    size = search_space_size(scenario.n_orus, scenario.n_ues, scenario.horizon, len(scenario.catalog))
    if size > ceiling:
        raise SearchSpaceTooLarge(size, ceiling)
    started = time.perf_counter()
    cost = cell_costs(scenario, alpha, normalization)
    tab = scenario.tables
    found, evaluations = _search(cost, tab.energy, cell_admissible(scenario), tab.capacity, _limits(scenario))
    elapsed = time.perf_counter() - started
    if found is None:
        return SolveOutcome(Status.INFEASIBLE, wall_time=elapsed, evaluations=evaluations,
                            diagnostic="no assignment satisfies every constraint")
    oru, opt, _ = found
    assignment = Assignment(oru, opt)
    report = objective(assignment, scenario, alpha, normalization)
    return SolveOutcome(Status.OPTIMAL, assignment, report,
                        trace=[TraceRecord(0, report.total, "exhaustive")],
                        wall_time=elapsed, evaluations=evaluations)


def solve_exhaustive_myopic(scenario: Scenario, alpha: float, *, ceiling: int = DEFAULT_CEILING,
                            normalization: str = "cell") -> SolveOutcome:
    """Per-step optimum with the battery carried forward between steps.

    Each step is solved exactly with only the energy left over from earlier
    steps available; future steps are not anticipated.
    """
    size = search_space_size(scenario.n_orus, scenario.n_ues, 1, len(scenario.catalog))
    if size > ceiling:
        raise SearchSpaceTooLarge(size, ceiling)
    started = time.perf_counter()
    cost = cell_costs(scenario, alpha, normalization)
    tab = scenario.tables
    admissible = cell_admissible(scenario)
    limits = _limits(scenario)
    spent = np.zeros(scenario.n_ues)
    oru = np.full((scenario.n_ues, scenario.horizon), -1, dtype=np.int64)
    opt = np.full_like(oru, -1)
    trace: list[TraceRecord] = []
    evaluations = 0
    for t in range(scenario.horizon):
        sl = slice(t, t + 1)
        found, n_eval = _search(cost[:, sl], tab.energy[:, sl], admissible[:, sl], tab.capacity, limits - spent)
        evaluations += n_eval
        if found is None:
            partial = Assignment(oru, opt) if t > 0 else None
            return SolveOutcome(Status.INFEASIBLE, trace=trace, evaluations=evaluations,
                                wall_time=time.perf_counter() - started, failed_step=t, partial=partial,
                                diagnostic=f"step {t} has no feasible assignment with the remaining battery")
        step_oru, step_opt, step_cost = found
        oru[:, t] = step_oru[:, 0]
        opt[:, t] = step_opt[:, 0]
        spent += tab.energy[np.arange(scenario.n_ues), t, oru[:, t], opt[:, t]]
        trace.append(TraceRecord(t, float(step_cost), f"step {t}"))
    assignment = Assignment(oru, opt)
    report = objective(assignment, scenario, alpha, normalization)
    violations = check(assignment, scenario)
    if violations:
        raise AssertionError(f"myopic search produced an infeasible assignment: {violations}")
    return SolveOutcome(Status.FEASIBLE, assignment, report, trace=trace, evaluations=evaluations,
                        wall_time=time.perf_counter() - started)
