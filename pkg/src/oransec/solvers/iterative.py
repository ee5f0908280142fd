"""Alternating (block-coordinate) minimisation.

Starting from an initial association, the solver alternates two exact
block solves of the same objective:

* options block: association fixed, each UE picks one cipher option per
  step (security requirement of its O-RU, compute budget, battery over the
  horizon);
* association block: each step is a capacitated min-cost assignment of UEs
  to O-RU resource-block slots, with the battery budget of every UE held at
  what its other steps consume. By default each candidate O-RU is priced at
  the cell's best admissible option, so a UE can leave an O-RU whose
  requirement pins it to an expensive cipher; with ``joint_association``
  off the options stay fixed, which is the plain alternation.

Each block starts from a feasible incumbent and only accepts an improving
move, so the objective trace never increases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..problem import ENERGY_RTOL, Assignment, cell_admissible, cell_costs, check, objective
from ..system_model import Scenario
from .outcome import SolveOutcome, Status, TraceRecord

X_INITS = ("best_rate", "round_robin", "seeded")
_FORBIDDEN = 1e9


@dataclass(frozen=True)
class IterativeConfig:
    epsilon: float = 1e-4
    u_max: int = 50
    x_init: str = "best_rate"
    seed: int = 0
    # per-UE trajectory count above which the options block falls back to the greedy split
    exact_block_limit: int = 200_000
    # association block prices each candidate O-RU at its best admissible option instead of the fixed one
    joint_association: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.u_max < 1:
            raise ValueError("u_max must be >= 1")
        if self.x_init not in X_INITS:
            raise ValueError(f"x_init must be one of {X_INITS}, got {self.x_init!r}")


class _Blocked(Exception):
    def __init__(self, cell, reason):
        super().__init__(reason)
        self.cell = cell


def _slot_assignment(cost: np.ndarray, allowed: np.ndarray, capacity: np.ndarray):
    """Min-cost assignment of rows (UEs) to columns (O-RUs) with column capacities.

    Returns the column per row, or ``None`` if some row can only be placed on
    a forbidden column.
    """
    n = cost.shape[0]
    slots = np.repeat(np.arange(cost.shape[1]), np.minimum(capacity, n))
    if len(slots) < n:
        return None
    expanded = np.where(allowed, cost, _FORBIDDEN)[:, slots]
    rows, cols = linear_sum_assignment(expanded)
    choice = np.empty(n, dtype=np.int64)
    choice[rows] = slots[cols]
    if not allowed[np.arange(n), choice].all():
        return None
    return choice


def _initial_association(scenario: Scenario, reach: np.ndarray, config: IterativeConfig) -> np.ndarray:
    n, horizon, n_orus = reach.shape
    capacity = scenario.tables.capacity
    x = np.empty((n, horizon), dtype=np.int64)
    rng = np.random.default_rng(config.seed)
    for t in range(horizon):
        if config.x_init == "best_rate":
            rate = scenario.rate_bps[:, :, t]
            pref = -rate / rate.max()
        elif config.x_init == "round_robin":
            pref = np.ones((n, n_orus))
            pref[np.arange(n), (np.arange(n) + t) % n_orus] = 0.0
        else:
            pref = rng.random((n, n_orus))
        col = _slot_assignment(pref, reach[:, t], capacity)
        if col is None:
            raise _Blocked((int(np.argmin(reach[:, t].sum(axis=1))), t),
                           f"no association at step {t} respects both security reachability and resource blocks")
        x[:, t] = col
    return x


def _best_options_exact(cost, energy, adm, limit):
    steps = cost.shape[0]
    choices = [np.flatnonzero(adm[s]) for s in range(steps)]
    grids = np.meshgrid(*choices, indexing="ij")
    combo = np.stack([g.ravel() for g in grids], axis=1)
    rows = np.arange(steps)
    total = cost[rows, combo].sum(axis=1)
    used = energy[rows, combo].sum(axis=1)
    total = np.where(used <= limit, total, np.inf)
    k = int(np.argmin(total))
    if not np.isfinite(total[k]):
        return None
    return combo[k]


def _best_options_greedy(cost, energy, adm, limit, payload):
    """Battery split across steps, largest payload first.

    Every step keeps back the cheapest-energy admissible option of the steps
    still to be decided, so a feasible split is always found when one exists.
    """
    steps = cost.shape[0]
    e_min = np.where(adm, energy, np.inf).min(axis=1)
    reserve = float(e_min.sum())
    if reserve > limit:
        return None
    budget = limit
    choice = np.empty(steps, dtype=np.int64)
    for s in sorted(range(steps), key=lambda s: (-payload[s], s)):
        reserve -= e_min[s]
        ok = adm[s] & (energy[s] <= budget - reserve)
        if not ok.any():
            ok = adm[s] & (energy[s] <= e_min[s])
        c = np.where(ok, cost[s], np.inf)
        choice[s] = int(np.argmin(c))
        budget -= energy[s, choice[s]]
    return choice


def _options_block(ctx, x, incumbent):
    cost, energy, adm, limits, payload, limit_exact = ctx
    n, horizon = x.shape
    ii, tt = np.meshgrid(np.arange(n), np.arange(horizon), indexing="ij")
    c = cost[ii, tt, x]        # [i, t, g]
    e = energy[ii, tt, x]
    a = adm[ii, tt, x]
    out = np.empty((n, horizon), dtype=np.int64)
    for i in range(n):
        empty = np.flatnonzero(~a[i].any(axis=1))
        if empty.size:
            raise _Blocked((i, int(empty[0])), f"UE {i} has no admissible option at step {int(empty[0])}")
        size = int(np.prod([a[i, s].sum() for s in range(horizon)], dtype=float))
        if size <= limit_exact:
            pick = _best_options_exact(c[i], e[i], a[i], limits[i])
        else:
            pick = _best_options_greedy(c[i], e[i], a[i], limits[i], payload[i])
        if pick is None:
            if incumbent is None:
                raise _Blocked((i, int(np.argmax(payload[i]))),
                               f"UE {i} cannot fit its horizon within the battery on the current association")
            pick = incumbent[i]
        elif incumbent is not None:
            rows = np.arange(horizon)
            if c[i, rows, pick].sum() > c[i, rows, incumbent[i]].sum():
                pick = incumbent[i]
        out[i] = pick
    return out


def _association_block(ctx, capacity, A, x, joint):
    cost, energy, adm, limits, _, _ = ctx
    n, horizon = x.shape
    ue = np.arange(n)
    x, A = x.copy(), A.copy()
    for t in range(horizon):
        step_energy = energy[ue[:, None], np.arange(horizon)[None, :], x, A]
        other = step_energy.sum(axis=1) - step_energy[:, t]
        here = cost[ue, t, x[:, t], A[:, t]].sum()
        if joint:
            ok = adm[:, t] & (other[:, None, None] + energy[:, t] <= limits[:, None, None])   # [i, j, g]
            priced = np.where(ok, cost[:, t], np.inf)
            pick = np.argmin(priced, axis=2)                                              # [i, j]
            c = np.take_along_axis(priced, pick[:, :, None], axis=2)[:, :, 0]
            allowed = np.isfinite(c)
            c = np.where(allowed, c, 0.0)
        else:
            g = A[:, t]
            c = cost[ue, t, :, g]                          # [i, j]
            allowed = adm[ue, t, :, g] & (other[:, None] + energy[ue, t, :, g] <= limits[:, None])
            pick = np.broadcast_to(g[:, None], c.shape)
        col = _slot_assignment(c, allowed, capacity)
        if col is None:
            continue
        if c[ue, col].sum() < here:
            x[:, t] = col
            A[:, t] = pick[ue, col]
    return x, A


def _total(cost, x, A):
    n, horizon = x.shape
    ii, tt = np.meshgrid(np.arange(n), np.arange(horizon), indexing="ij")
    return float(cost[ii, tt, x, A].sum())


def solve_iterative(scenario: Scenario, alpha: float, config: IterativeConfig = IterativeConfig(),
                    normalization: str = "cell") -> SolveOutcome:
    started = time.perf_counter()
    tab = scenario.tables
    cost = cell_costs(scenario, alpha, normalization)
    adm = np.ascontiguousarray(cell_admissible(scenario))
    limits = tab.battery * (1.0 + ENERGY_RTOL)
    payload = np.array([ue.payload_bits for ue in scenario.ues])
    ctx = (cost, tab.energy, adm, limits, payload, config.exact_block_limit)

    trace: list[TraceRecord] = []
    evaluations = 0
    try:
        x = _initial_association(scenario, adm.any(axis=3), config)
        A = _options_block(ctx, x, None)
    except _Blocked as blocked:
        return SolveOutcome(Status.INFEASIBLE, trace=trace, diagnostic=str(blocked), blocking=blocked.cell,
                            wall_time=time.perf_counter() - started)

    previous = np.inf
    converged = False
    u = 1
    while True:
        if u > 1:
            A = _options_block(ctx, x, A)
        trace.append(TraceRecord(u, _total(cost, x, A), "A"))
        x, A = _association_block(ctx, tab.capacity, A, x, config.joint_association)
        current = _total(cost, x, A)
        trace.append(TraceRecord(u, current, "x"))
        evaluations += 2
        if abs(current - previous) < config.epsilon:
            converged = True
            break
        previous = current
        u += 1
        if u > config.u_max:
            break

    assignment = Assignment(x, A)
    violations = check(assignment, scenario)
    if violations:
        raise AssertionError(f"iterative solver produced an infeasible assignment: {violations}")
    return SolveOutcome(Status.FEASIBLE if converged else Status.ITERATION_LIMIT, assignment,
                        objective(assignment, scenario, alpha, normalization), trace=trace,
                        evaluations=evaluations, wall_time=time.perf_counter() - started)
