"""One-shot relaxed solve.

The binary association and option indicators are relaxed to continuous
values written as exponentials, ``x = exp(zx)`` and ``a = exp(za)``, so
they stay positive and every product of indicators becomes the exponential
of a sum. The exactly-one constraints become a pair of inequalities on the
sum of exponentials, and a bound on the sum of pairwise products pushes
each row towards a single dominant entry. All constraints enter as
squared-hinge penalties whose weight grows stage by stage; each stage is a
bound-constrained quasi-Newton solve (L-BFGS-B) in the log variables. The relaxed
point is then discretised per (UE, step) row and optionally repaired.

Indicator entries that can never be 1 in a feasible assignment (an option
above the compute budget, an option below every reachable security
requirement, an O-RU whose requirement no budget-feasible option meets)
are fixed at zero before the descent.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..problem import (SECURITY_ATOL, Assignment, cell_admissible, check, normalization_bounds, objective)
from ..system_model import Scenario
from .outcome import RepairFailed, SolveOutcome, Status, TraceRecord
from .repair import repair

# box on the log variables: indicators live in [e^-30, e^0.5]
_Z_MIN, _Z_MAX = -30.0, 0.5

ROUNDINGS = ("floor", "nearest_feasible")


@dataclass(frozen=True)
class OneShotConfig:
    epsilon_pair: float = 1e-2
    step_tolerance: float = 1e-6
    max_iterations: int = 4000
    rounding: str = "nearest_feasible"
    penalty_start: float = 1.0
    penalty_growth: float = 10.0
    penalty_stages: int = 5

    def __post_init__(self):
        if not self.epsilon_pair > 0:
            raise ValueError("epsilon_pair must be positive")
        if not self.step_tolerance > 0:
            raise ValueError("step_tolerance must be positive")
        if self.max_iterations < 1 or self.penalty_stages < 1:
            raise ValueError("max_iterations and penalty_stages must be >= 1")
        if self.rounding not in ROUNDINGS:
            raise ValueError(f"rounding must be one of {ROUNDINGS}, got {self.rounding!r}")


class RelaxedProblem:
    """Penalised relaxation in log variables.

    ``value_and_grad(za, zx, mu)`` returns the penalised objective and its
    gradient with respect to ``za`` [i, t, g] and ``zx`` [i, t, j].
    """

    def __init__(self, scenario: Scenario, alpha: float, epsilon_pair: float, normalization: str = "cell"):
        tab = scenario.tables
        s_max, l_max = normalization_bounds(scenario, normalization)
        self.alpha = alpha
        self.eps = epsilon_pair
        self.s_max = s_max
        self.sec = tab.security / s_max                                     # [g]
        self.req = tab.requirement / s_max                                  # [j]
        with np.errstate(divide="ignore"):
            self.w = np.where(l_max > 0, alpha / np.where(l_max > 0, l_max, 1.0), 0.0)   # [i, t]
        self.enc = tab.enc_latency                                          # [i, t, g]
        self.cd = tab.comm_latency + tab.dec_latency                        # [i, t, j, g]
        self.enc_e = tab.compute_energy / tab.battery[:, None, None]        # [i, t, g]
        self.comm_e = tab.comm_energy / tab.battery[:, None, None, None]    # [i, t, j, g]
        self.cyc = tab.enc_cycles[None, :] / tab.budget[:, None]            # [i, g]
        self.cap = tab.capacity.astype(float)

        adm = cell_admissible(scenario)
        x_free = adm.any(axis=3)                                            # [i, t, j]
        cyc_ok = (tab.enc_cycles[None, :] <= tab.budget[:, None])           # [i, g]
        lowest = np.where(x_free, tab.requirement[None, None, :], np.inf).min(axis=2)
        a_free = cyc_ok[:, None, :] & (tab.security[None, None, :] >= lowest[:, :, None] - SECURITY_ATOL)
        self.x_mask = x_free.astype(float)
        self.a_mask = a_free.astype(float)
        self.solvable = bool(x_free.any(axis=2).all())

    def start(self):
        za = np.where(self.a_mask > 0, -np.log(np.maximum(self.a_mask.sum(axis=2, keepdims=True), 1)), 0.0)
        zx = np.where(self.x_mask > 0, -np.log(np.maximum(self.x_mask.sum(axis=2, keepdims=True), 1)), 0.0)
        return za, zx

    def value_and_grad(self, za, zx, mu):
        a = np.exp(za) * self.a_mask
        x = np.exp(zx) * self.x_mask
        alpha = self.alpha

        # objective: security deficit + normalised expected latency
        xa_cd = np.einsum("itj,itjg->itg", x, self.cd)
        lat = np.einsum("itg,itg->it", a, self.enc + xa_cd)
        f = (1 - alpha) * np.sum(1.0 - a @ self.sec) + np.sum(self.w * lat)
        ga = -(1 - alpha) * self.sec + self.w[:, :, None] * (self.enc + xa_cd)
        gx = self.w[:, :, None] * np.einsum("itg,itjg->itj", a, self.cd)

        pen = 0.0
        # exactly-one rows, as a pair of opposite inequalities
        for v, g in ((x, gx), (a, ga)):
            s = v.sum(axis=2)
            h = s - 1.0
            pen += np.sum(h * h)
            g += mu * 2.0 * h[:, :, None]
            pairs = 0.5 * (s * s - np.sum(v * v, axis=2))
            h = np.maximum(pairs - self.eps, 0.0)
            pen += np.sum(h * h)
            g += mu * 2.0 * h[:, :, None] * (s[:, :, None] - v)

        # security requirement of the chosen O-RU
        h = np.maximum(x @ self.req - a @ self.sec, 0.0)
        pen += np.sum(h * h)
        gx += mu * 2.0 * h[:, :, None] * self.req
        ga -= mu * 2.0 * h[:, :, None] * self.sec

        # resource blocks per (O-RU, step)
        h = np.maximum(x.sum(axis=0) - self.cap[None, :], 0.0)   # [t, j]
        pen += np.sum(h * h)
        gx += mu * 2.0 * h[None, :, :]

        # per-block compute budget
        h = np.maximum(np.einsum("itg,ig->it", a, self.cyc) - 1.0, 0.0)
        pen += np.sum(h * h)
        ga += mu * 2.0 * h[:, :, None] * self.cyc[:, None, :]

        # battery over the horizon
        xa_ce = np.einsum("itj,itjg->itg", x, self.comm_e)
        used = np.einsum("itg,itg->i", a, self.enc_e + xa_ce)
        h = np.maximum(used - 1.0, 0.0)
        pen += np.sum(h * h)
        ga += mu * 2.0 * h[:, None, None] * (self.enc_e + xa_ce)
        gx += mu * 2.0 * h[:, None, None] * np.einsum("itg,itjg->itj", a, self.comm_e)

        value = f + mu * pen
        return value, ga * a, gx * x

    def relaxed_objective(self, za, zx):
        return self.value_and_grad(za, zx, 0.0)[0]


def _descend(problem: RelaxedProblem, config: OneShotConfig):
    """Penalty continuation; each stage is an L-BFGS-B solve warm-started from the last."""
    za, zx = problem.start()
    shape_a, split = za.shape, za.size
    z = np.concatenate([za.ravel(), zx.ravel()])
    trace: list[TraceRecord] = []
    evaluations = 0
    iteration = 0
    per_stage = max(1, config.max_iterations // config.penalty_stages)
    mu = config.penalty_start
    for stage in range(config.penalty_stages):
        def fun(v, mu=mu):
            value, ga, gx = problem.value_and_grad(v[:split].reshape(shape_a), v[split:].reshape(zx.shape), mu)
            return value, np.concatenate([ga.ravel(), gx.ravel()])

        res = minimize(fun, z, jac=True, method="L-BFGS-B", bounds=[(_Z_MIN, _Z_MAX)] * z.size,
                       options={"maxiter": per_stage, "gtol": config.step_tolerance})
        evaluations += int(res.nfev)
        iteration += int(res.nit)
        if not np.all(np.isfinite(res.x)) or not math.isfinite(float(res.fun)):
            return None, trace, evaluations
        z = res.x
        trace.append(TraceRecord(iteration, float(res.fun), f"relaxed stage {stage} (penalty {mu:g})"))
        mu *= config.penalty_growth
    return (z[:split].reshape(shape_a), z[split:].reshape(zx.shape)), trace, evaluations


def _round(problem: RelaxedProblem, za, zx) -> Assignment:
    a = np.where(problem.a_mask > 0, za, -np.inf)
    x = np.where(problem.x_mask > 0, zx, -np.inf)
    return Assignment(np.argmax(x, axis=2), np.argmax(a, axis=2))


def solve_oneshot(scenario: Scenario, alpha: float, config: OneShotConfig = OneShotConfig(),
                  normalization: str = "cell") -> SolveOutcome:
    started = time.perf_counter()
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    problem = RelaxedProblem(scenario, alpha, config.epsilon_pair, normalization)
    if not problem.solvable:
        return SolveOutcome(Status.INFEASIBLE, wall_time=time.perf_counter() - started,
                            diagnostic="some UE cannot meet the security requirement of any O-RU")
    point, trace, evaluations = _descend(problem, config)
    if point is None:
        return SolveOutcome(Status.INFEASIBLE, trace=trace, evaluations=evaluations,
                            wall_time=time.perf_counter() - started,
                            diagnostic="relaxed descent produced a non-finite objective")
    assignment = _round(problem, *point)
    violations = check(assignment, scenario)
    if violations and config.rounding == "nearest_feasible":
        try:
            assignment = repair(assignment, scenario, alpha, normalization)
        except RepairFailed as exc:
            return SolveOutcome(Status.INFEASIBLE, trace=trace, evaluations=evaluations, violations=violations,
                                wall_time=time.perf_counter() - started, diagnostic=f"repair failed: {exc}")
        violations = check(assignment, scenario)
    if violations:
        return SolveOutcome(Status.INFEASIBLE, trace=trace, evaluations=evaluations, violations=violations,
                            partial=assignment, wall_time=time.perf_counter() - started,
                            diagnostic="rounded relaxation violates constraints")
    report = objective(assignment, scenario, alpha, normalization)
    trace.append(TraceRecord(trace[-1].iteration if trace else 0, report.total, "discrete"))
    return SolveOutcome(Status.FEASIBLE, assignment, report, trace=trace, evaluations=evaluations,
                        wall_time=time.perf_counter() - started)
