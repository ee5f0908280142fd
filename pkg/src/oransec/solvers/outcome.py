from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..problem import Assignment, ConstraintViolation, ObjectiveReport


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    block: str


@dataclass
class SolveOutcome:
    """Result of one solve call.

    ``assignment`` and ``report`` are ``None`` when the status is
    Infeasible. ``partial`` carries the steps completed before a myopic
    solve failed (unsolved steps hold -1) and ``failed_step`` the step it
    failed at. ``blocking`` names the (ue, step) cell that made an
    iterative block infeasible, when known.
    """

    status: Status
    assignment: Optional[Assignment] = None
    report: Optional[ObjectiveReport] = None
    trace: list[TraceRecord] = field(default_factory=list)
    wall_time: float = 0.0
    evaluations: int = 0
    diagnostic: str = ""
    violations: list[ConstraintViolation] = field(default_factory=list)
    blocking: Optional[tuple[int, int]] = None
    failed_step: Optional[int] = None
    partial: Optional[Assignment] = None

    @property
    def feasible(self) -> bool:
        return self.assignment is not None and self.status is not Status.INFEASIBLE

    @property
    def total(self) -> float:
        return self.report.total if self.report is not None else float("nan")


class SearchSpaceTooLarge(ValueError):
    def __init__(self, size: int, ceiling: int):
        super().__init__(f"search space of {size:.3e} candidates exceeds the ceiling of {ceiling:.3e}")
        self.size = size
        self.ceiling = ceiling


class RepairFailed(RuntimeError):
    pass
