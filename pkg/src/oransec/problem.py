"""Joint association / cipher-selection problem: encoding, constraints, objective.

An :class:`Assignment` stores, for every (UE, step) cell, one O-RU index and
one catalog index. The exactly-one association and exactly-one cipher
constraints therefore hold by construction; :func:`check` covers the rest
(security requirement, resource blocks, compute budget, battery).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .system_model import Scenario

NORMALIZATIONS = ("cell", "global")
ENERGY_RTOL = 1e-9
SECURITY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Assignment:
    oru_of: np.ndarray     # [i, t] -> O-RU index
    option_of: np.ndarray  # [i, t] -> catalog index

    def __post_init__(self):
        oru = np.array(self.oru_of, dtype=np.int64)
        opt = np.array(self.option_of, dtype=np.int64)
        if oru.ndim != 2 or oru.shape != opt.shape:
            raise ValueError(f"oru_of {oru.shape} and option_of {opt.shape} must be equal 2-D tables")
        oru.setflags(write=False)
        opt.setflags(write=False)
        object.__setattr__(self, "oru_of", oru)
        object.__setattr__(self, "option_of", opt)

    @property
    def shape(self) -> tuple[int, int]:
        return self.oru_of.shape

    def key(self) -> tuple[int, ...]:
        """Lexicographic ordering key: all O-RU entries row-major, then options."""
        return tuple(self.oru_of.ravel().tolist()) + tuple(self.option_of.ravel().tolist())

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.oru_of, other.oru_of) and np.array_equal(self.option_of, other.option_of)

    def __hash__(self):
        return hash(self.key())

    def to_dict(self) -> dict:
        return {"oru_of": self.oru_of.tolist(), "option_of": self.option_of.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Assignment":
        return cls(np.array(data["oru_of"]), np.array(data["option_of"]))

    @classmethod
    def uniform(cls, n_ues: int, horizon: int, oru: int = 0, option: int = 0) -> "Assignment":
        return cls(np.full((n_ues, horizon), oru), np.full((n_ues, horizon), option))


class ViolationKind(str, enum.Enum):
    SECURITY_REQUIREMENT = "SecurityRequirement"
    RESOURCE_BLOCKS = "ResourceBlocks"
    COMPUTE_BUDGET = "ComputeBudget"
    BATTERY = "Battery"


@dataclass(frozen=True)
class ConstraintViolation:
    kind: ViolationKind
    subject: tuple[str, int]      # ("ue", i) or ("oru", j)
    step: Optional[int]           # None = whole horizon
    slack: float                  # negative = amount of violation

    def __str__(self):
        where = "horizon" if self.step is None else f"t={self.step}"
        return f"{self.kind.value}({self.subject[0]} {self.subject[1]}, {where}, slack={self.slack:g})"


@dataclass(frozen=True, eq=False)
class ObjectiveReport:
    alpha: float
    security_term: float
    latency_term: float
    total: float
    security_bits: np.ndarray     # [i, t]
    latency_s: np.ndarray         # [i, t]
    norm_security: np.ndarray     # [i, t]
    norm_latency: np.ndarray      # [i, t]

    @property
    def mean_norm_security(self) -> float:
        return float(self.norm_security.mean())

    @property
    def mean_norm_latency(self) -> float:
        return float(self.norm_latency.mean())


def _validate_shape(assignment: Assignment, scenario: Scenario) -> None:
    expected = (scenario.n_ues, scenario.horizon)
    if assignment.shape != expected:
        raise ValueError(f"assignment has shape {assignment.shape}, scenario needs {expected}")
    if assignment.oru_of.min() < 0 or assignment.oru_of.max() >= scenario.n_orus:
        raise ValueError("assignment references an O-RU index out of range")
    if assignment.option_of.min() < 0 or assignment.option_of.max() >= len(scenario.catalog):
        raise ValueError("assignment references a catalog index out of range")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def _gather(table: np.ndarray, assignment: Assignment) -> np.ndarray:
    n, horizon = assignment.shape
    ii, tt = np.meshgrid(np.arange(n), np.arange(horizon), indexing="ij")
    return table[ii, tt, assignment.oru_of, assignment.option_of]


def ue_energy(assignment: Assignment, scenario: Scenario) -> np.ndarray:
    """Energy drawn from each UE's battery per step, shape [i, t]."""
    return _gather(scenario.tables.energy, assignment)


def check(assignment: Assignment, scenario: Scenario) -> list[ConstraintViolation]:
    """All constraint violations of ``assignment``; empty means feasible."""
    _validate_shape(assignment, scenario)
    tab = scenario.tables
    out: list[ConstraintViolation] = []
    n, horizon = assignment.shape

    sec = tab.security[assignment.option_of]
    req = tab.requirement[assignment.oru_of]
    for i in range(n):
        for t in range(horizon):
            if sec[i, t] < req[i, t] - SECURITY_ATOL:
                out.append(ConstraintViolation(ViolationKind.SECURITY_REQUIREMENT, ("ue", i), t,
                                               float(sec[i, t] - req[i, t])))

    for t in range(horizon):
        counts = np.bincount(assignment.oru_of[:, t], minlength=scenario.n_orus)
        for j in range(scenario.n_orus):
            cap = scenario.orus[j].resource_blocks
            if counts[j] > cap:
                out.append(ConstraintViolation(ViolationKind.RESOURCE_BLOCKS, ("oru", j), t, float(cap - int(counts[j]))))

    for i, ue in enumerate(scenario.ues):
        for t in range(horizon):
            cycles = scenario.catalog[assignment.option_of[i, t]].enc_cycles_per_block
            if cycles > ue.compute_budget_cycles:
                out.append(ConstraintViolation(ViolationKind.COMPUTE_BUDGET, ("ue", i), t,
                                               float(ue.compute_budget_cycles - cycles)))

    energy = ue_energy(assignment, scenario).sum(axis=1)
    for i, ue in enumerate(scenario.ues):
        if energy[i] > ue.battery_joules * (1.0 + ENERGY_RTOL):
            out.append(ConstraintViolation(ViolationKind.BATTERY, ("ue", i), None,
                                           float(ue.battery_joules - energy[i])))
    return out


def normalization_bounds(scenario: Scenario, normalization: str = "cell") -> tuple[float, np.ndarray]:
    """(max catalog security, latency bound per [i, t] cell).

    ``"cell"`` bounds each cell by its own worst (O-RU, option) latency;
    ``"global"`` uses the single worst latency over the whole scenario.
    Feasibility is ignored in both.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    cache = scenario.__dict__.setdefault("_norm_cache", {})
    if normalization not in cache:
        tab = scenario.tables
        s_max = float(tab.security.max())
        l_max = tab.latency.max(axis=(2, 3))
        if normalization == "global":
            l_max = np.full_like(l_max, l_max.max())
        l_max.setflags(write=False)
        cache[normalization] = (s_max, l_max)
    return cache[normalization]


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=np.broadcast_to(den, out.shape) > 0)
    return out


def cell_costs(scenario: Scenario, alpha: float, normalization: str = "cell") -> np.ndarray:
    """Objective contribution of every (i, t, j, g) choice.

    The objective is a sum of these over the chosen cell entries, so solvers
    can work directly on this table.
    """
    alpha = _check_alpha(alpha)
    s_max, l_max = normalization_bounds(scenario, normalization)
    tab = scenario.tables
    deficit = 1.0 - tab.security / s_max
    norm_l = _safe_ratio(tab.latency, l_max[:, :, None, None])
    return (1.0 - alpha) * deficit[None, None, None, :] + alpha * norm_l


def cell_admissible(scenario: Scenario) -> np.ndarray:
    """[i, t, j, g] mask of choices meeting the per-cell constraints.

    Covers the security requirement and the per-block compute budget; the
    coupled constraints (resource blocks, battery) are not included.
    """
    tab = scenario.tables
    sec_ok = tab.security[None, :] >= tab.requirement[:, None] - SECURITY_ATOL      # [j, g]
    cyc_ok = tab.enc_cycles[None, :] <= tab.budget[:, None]                          # [i, g]
    mask = sec_ok[None, None, :, :] & cyc_ok[:, None, None, :]
    return np.broadcast_to(mask, (scenario.n_ues, scenario.horizon, scenario.n_orus, len(scenario.catalog)))


def objective(assignment: Assignment, scenario: Scenario, alpha: float,
              normalization: str = "cell") -> ObjectiveReport:
    """Weighted normalized security deficit plus normalized latency.

    Feasibility is not required.
    """
    alpha = _check_alpha(alpha)
    _validate_shape(assignment, scenario)
    s_max, l_max = normalization_bounds(scenario, normalization)
    tab = scenario.tables
    sec = tab.security[assignment.option_of]
    lat = _gather(tab.latency, assignment)
    norm_s = sec / s_max
    norm_l = _safe_ratio(lat, l_max)
    security_term = float(np.sum(1.0 - norm_s))
    latency_term = float(np.sum(norm_l))
    return ObjectiveReport(
        alpha=alpha,
        security_term=security_term,
        latency_term=latency_term,
        total=(1.0 - alpha) * security_term + alpha * latency_term,
        security_bits=sec,
        latency_s=lat,
        norm_security=norm_s,
        norm_latency=norm_l,
    )
