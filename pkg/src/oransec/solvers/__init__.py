from .exhaustive import DEFAULT_CEILING, search_space_size, solve_exhaustive, solve_exhaustive_myopic
from .iterative import IterativeConfig, solve_iterative
from .oneshot import OneShotConfig, RelaxedProblem, solve_oneshot
from .outcome import RepairFailed, SearchSpaceTooLarge, SolveOutcome, Status, TraceRecord
from .repair import repair

__all__ = [
    "DEFAULT_CEILING",
    "IterativeConfig",
    "OneShotConfig",
    "RelaxedProblem",
    "RepairFailed",
    "SearchSpaceTooLarge",
    "SolveOutcome",
    "Status",
    "TraceRecord",
    "repair",
    "search_space_size",
    "solve_exhaustive",
    "solve_exhaustive_myopic",
    "solve_iterative",
    "solve_oneshot",
]
