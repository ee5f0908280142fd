"""Experiment runner: sweeps and traces written as CSV with a manifest.

Every function takes a :class:`RunManifest` and returns its rows as a list
of dicts; when ``manifest.output_dir`` is set it also writes
``<experiment>.csv``, ``manifest.json`` and ``timings.csv``. The results
CSV is a pure function of the manifest and the package version. Wall-clock
times go to ``timings.csv`` only, so reruns produce identical result files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .crypto_cost import SECURITY_LEVELS
from .problem import objective, ue_energy
from .scenario import GenParams, builtin, generate, load, tier_params, with_security_requirement
from .solvers import (IterativeConfig, OneShotConfig, SolveOutcome, Status, solve_exhaustive,
                      solve_exhaustive_myopic, solve_iterative, solve_oneshot)
from .system_model import Scenario

SOLVERS = ("exhaustive", "myopic", "iterative", "oneshot")


@dataclass
class RunManifest:
    experiment: str
    seeds: tuple[int, ...] = (0,)
    params: GenParams = field(default_factory=GenParams)
    solvers: tuple[str, ...] = ("iterative", "oneshot")
    iterative: IterativeConfig = field(default_factory=IterativeConfig)
    oneshot: OneShotConfig = field(default_factory=OneShotConfig)
    alphas: tuple[float, ...] = ()
    alpha: float = 0.5
    w_grid: tuple[float, ...] = ()
    tiers: tuple[str, ...] = ("low", "medium", "high")
    scenario: Optional[str] = None
    normalization: str = "cell"
    ceiling: int = 10**8
    output_dir: Optional[str] = None
    artifact_version: str = __version__

    def __post_init__(self):
        unknown = [s for s in self.solvers if s not in SOLVERS]
        if unknown:
            raise ValueError(f"unknown solver(s) {unknown}; expected a subset of {SOLVERS}")
        self.seeds = tuple(int(s) for s in self.seeds)
        self.solvers = tuple(self.solvers)
        self.alphas = tuple(float(a) for a in self.alphas)
        self.w_grid = tuple(float(w) for w in self.w_grid)
        self.tiers = tuple(self.tiers)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["params"] = self.params.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        data = dict(data)
        if "params" in data:
            data["params"] = GenParams.from_dict(data["params"])
        if "iterative" in data:
            data["iterative"] = IterativeConfig(**data["iterative"])
        if "oneshot" in data:
            data["oneshot"] = OneShotConfig(**data["oneshot"])
        return cls(**data)


def run_solver(name: str, scenario: Scenario, alpha: float, manifest: RunManifest) -> SolveOutcome:
    norm = manifest.normalization
    if name == "exhaustive":
        return solve_exhaustive(scenario, alpha, ceiling=manifest.ceiling, normalization=norm)
    if name == "myopic":
        return solve_exhaustive_myopic(scenario, alpha, ceiling=manifest.ceiling, normalization=norm)
    if name == "iterative":
        return solve_iterative(scenario, alpha, manifest.iterative, norm)
    if name == "oneshot":
        return solve_oneshot(scenario, alpha, manifest.oneshot, norm)
    raise ValueError(f"unknown solver {name!r}")


def _scenario_source(source: str) -> Scenario:
    if source.startswith("builtin:"):
        found = builtin(source.split(":", 1)[1])
        if found is None:
            raise ValueError(f"unknown built-in scenario {source!r}")
        return found
    return load(source)


def scenarios(manifest: RunManifest, params: Optional[GenParams] = None) -> list[tuple[str, Scenario]]:
    """(label, scenario) pairs in deterministic order."""
    if manifest.scenario:
        return [(manifest.scenario, _scenario_source(manifest.scenario))]
    params = params or manifest.params
    return [(str(seed), generate(replace(params, seed=seed))) for seed in manifest.seeds]


# --- formatting ------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value != value:
            return ""
        return format(value, ".12g")
    if isinstance(value, Status):
        return value.value
    return str(value)


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


class _Timer:
    def __init__(self):
        self.rows: list[dict] = []

    def record(self, label: str, point: str, solver: str, outcome: SolveOutcome):
        self.rows.append({"scenario": label, "point": point, "solver": solver,
                          "wall_time_s": outcome.wall_time, "evaluations": outcome.evaluations})


def _write(manifest: RunManifest, name: str, rows: list[dict], columns: list[str], timer: _Timer) -> None:
    if manifest.output_dir is None:
        return
    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(to_csv(rows, columns), encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    (out / "timings.csv").write_text(
        to_csv(timer.rows, ["scenario", "point", "solver", "wall_time_s", "evaluations"]), encoding="utf-8")


def _metrics(outcome: SolveOutcome) -> dict:
    if not outcome.feasible:
        return {"status": outcome.status}
    rep = outcome.report
    return {
        "status": outcome.status,
        "mean_norm_latency": rep.mean_norm_latency,
        "mean_norm_security": rep.mean_norm_security,
        "sum_norm_latency": float(rep.norm_latency.sum()),
        "sum_norm_security": float(rep.norm_security.sum()),
        "mean_latency_s": float(rep.latency_s.mean()),
        "mean_security_bits": float(rep.security_bits.mean()),
        "total": rep.total,
    }


METRIC_COLUMNS = ["status", "mean_norm_latency", "mean_norm_security", "sum_norm_latency", "sum_norm_security",
                  "mean_latency_s", "mean_security_bits", "total"]
ALPHA_COLUMNS = ["scenario", "alpha", "solver"] + METRIC_COLUMNS
W_COLUMNS = ["scenario", "w_bits", "solver"] + METRIC_COLUMNS
TIER_COLUMNS = ["scenario", "tier", "alpha", "solver"] + METRIC_COLUMNS
CONVERGENCE_COLUMNS = ["scenario", "kind", "iteration", "objective", "status"]
BATTERY_COLUMNS = ["scenario", "solver", "ue", "step", "status", "step_energy_j", "remaining_battery_j",
                   "security_bits"]


# --- experiments --------------------------------------------------------------------------

def sweep_alpha(manifest: RunManifest) -> list[dict]:
    for a in manifest.alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha grid value {a} outside [0, 1]")
    rows, timer = [], _Timer()
    for label, scen in scenarios(manifest):
        for alpha in manifest.alphas:
            for solver in manifest.solvers:
                outcome = run_solver(solver, scen, alpha, manifest)
                timer.record(label, f"alpha={alpha:g}", solver, outcome)
                rows.append({"scenario": label, "alpha": alpha, "solver": solver, **_metrics(outcome)})
    _write(manifest, "sweep_alpha", rows, ALPHA_COLUMNS, timer)
    return rows


def catalog_level(w: float) -> float:
    """Snap a user-supplied requirement to the exact catalog level it names."""
    for level in SECURITY_LEVELS:
        if abs(level - w) <= 1e-3:
            return level
    raise ValueError(f"security requirement {w} is not a catalog level; expected one of "
                     f"{[round(v, 3) for v in SECURITY_LEVELS]}")


def sweep_security_requirement(manifest: RunManifest) -> list[dict]:
    grid = [catalog_level(w) for w in manifest.w_grid]
    rows, timer = [], _Timer()
    for label, scen in scenarios(manifest):
        for w in grid:
            fixed = with_security_requirement(scen, w)
            for solver in manifest.solvers:
                outcome = run_solver(solver, fixed, manifest.alpha, manifest)
                timer.record(label, f"w={w:g}", solver, outcome)
                rows.append({"scenario": label, "w_bits": w, "solver": solver, **_metrics(outcome)})
    _write(manifest, "sweep_w", rows, W_COLUMNS, timer)
    return rows


def sweep_resources(manifest: RunManifest) -> list[dict]:
    """Same seeds under each resource tier; only budget and battery ranges differ."""
    rows, timer = [], _Timer()
    for tier in manifest.tiers:
        params = tier_params(manifest.params, tier)
        for label, scen in scenarios(manifest, params):
            for solver in manifest.solvers:
                outcome = run_solver(solver, scen, manifest.alpha, manifest)
                timer.record(label, f"tier={tier}", solver, outcome)
                rows.append({"scenario": label, "tier": tier, "alpha": manifest.alpha, "solver": solver,
                             **_metrics(outcome)})
    _write(manifest, "sweep_resources", rows, TIER_COLUMNS, timer)
    return rows


def trace_convergence(manifest: RunManifest) -> list[dict]:
    """Objective after every iteration of the alternating solver.

    One ``iterate`` row per completed iteration, then one ``final`` row with
    the solve status (the only row when the instance is infeasible).
    """
    rows, timer = [], _Timer()
    for label, scen in scenarios(manifest):
        outcome = solve_iterative(scen, manifest.alpha, manifest.iterative, manifest.normalization)
        timer.record(label, f"alpha={manifest.alpha:g}", "iterative", outcome)
        for rec in outcome.trace:
            if rec.block == "x":
                rows.append({"scenario": label, "kind": "iterate", "iteration": rec.iteration,
                             "objective": rec.objective, "status": ""})
        rows.append({"scenario": label, "kind": "final",
                     "iteration": outcome.trace[-1].iteration if outcome.trace else None,
                     "objective": outcome.total if outcome.feasible else None, "status": outcome.status})
    _write(manifest, "trace_convergence", rows, CONVERGENCE_COLUMNS, timer)
    return rows


def battery_rows(label: str, solver: str, scen: Scenario, outcome: SolveOutcome) -> list[dict]:
    rows = []
    assignment = outcome.assignment if outcome.feasible else outcome.partial
    if outcome.feasible:
        steps_done = scen.horizon
    elif outcome.failed_step is not None:
        steps_done = outcome.failed_step
    else:
        steps_done = 0
    energy = ue_energy(assignment, scen) if (assignment is not None and steps_done == scen.horizon) else None
    tab = scen.tables
    for i, ue in enumerate(scen.ues):
        remaining = ue.battery_joules
        for t in range(steps_done):
            j, g = assignment.oru_of[i, t], assignment.option_of[i, t]
            used = float(energy[i, t]) if energy is not None else float(tab.energy[i, t, j, g])
            remaining -= used
            rows.append({"scenario": label, "solver": solver, "ue": i, "step": t, "status": outcome.status,
                         "step_energy_j": used, "remaining_battery_j": remaining,
                         "security_bits": float(tab.security[g])})
        if not outcome.feasible:
            rows.append({"scenario": label, "solver": solver, "ue": i, "step": steps_done, "status": outcome.status,
                         "remaining_battery_j": remaining})
    return rows


def trace_battery(manifest: RunManifest) -> list[dict]:
    """Remaining battery and chosen security per (solver, UE, step)."""
    if "myopic" not in manifest.solvers or not set(manifest.solvers) - {"myopic"}:
        raise ValueError("trace-battery needs the myopic solver and at least one horizon solver")
    rows, timer = [], _Timer()
    for label, scen in scenarios(manifest):
        for solver in manifest.solvers:
            outcome = run_solver(solver, scen, manifest.alpha, manifest)
            timer.record(label, f"alpha={manifest.alpha:g}", solver, outcome)
            rows.extend(battery_rows(label, solver, scen, outcome))
    _write(manifest, "trace_battery", rows, BATTERY_COLUMNS, timer)
    return rows


EXPERIMENTS: dict[str, Callable[[RunManifest], list[dict]]] = {
    "sweep-alpha": sweep_alpha,
    "sweep-w": sweep_security_requirement,
    "sweep-resources": sweep_resources,
    "trace-convergence": trace_convergence,
    "trace-battery": trace_battery,
}


def run(manifest: RunManifest) -> list[dict]:
    if manifest.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {manifest.experiment!r}; expected one of {tuple(EXPERIMENTS)}")
    return EXPERIMENTS[manifest.experiment](manifest)


# --- invariant checks ------------------------------------------------------------------------

def verify(scenario: Scenario, alpha: float = 0.5, ceiling: int = 10**7) -> list[tuple[str, bool, str]]:
    """Run the model and solver invariants on one scenario.

    Returns ``(name, passed, detail)`` triples.
    """
    from .crypto_cost import catalog
    from .problem import check
    from .solvers import search_space_size
    from .system_model import total_latency

    results = []

    table = {o.key_bits: (o.enc_cycles_per_block, o.dec_cycles_per_block) for o in catalog()}
    expected = {64: (656, 656), 128: (6168, 12432), 192: (7512, 15168), 256: (8856, 17904),
                1024: (1048576,) * 2, 2048: (4194304,) * 2, 3072: (9437184,) * 2, 4096: (16777216,) * 2}
    results.append(("cycle table", table == expected, ""))

    lat = scenario.tables.latency
    worst = 0.0
    for i in range(scenario.n_ues):
        for t in range(scenario.horizon):
            for j in range(scenario.n_orus):
                for g in range(len(scenario.catalog)):
                    ref = total_latency(scenario, i, j, g, t)
                    worst = max(worst, abs(lat[i, t, j, g] - ref) / max(ref, 1e-300))
    results.append(("latency tables match scalar formulas", worst < 1e-12, f"max rel diff {worst:.2e}"))

    it = solve_iterative(scenario, alpha)
    os_ = solve_oneshot(scenario, alpha)
    for name, out in (("iterative", it), ("oneshot", os_)):
        ok = (not out.feasible) or not check(out.assignment, scenario)
        results.append((f"{name} feasible output passes check", ok, out.status.value))
    values = [r.objective for r in it.trace]
    mono = all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(values, values[1:]))
    results.append(("iterative trace nonincreasing", mono, f"{len(values)} records"))

    if it.feasible:
        a0 = objective(it.assignment, scenario, 0.0)
        a1 = objective(it.assignment, scenario, 1.0)
        rep = it.report
        pred = a0.total + alpha * (a1.total - a0.total)
        results.append(("objective affine in alpha", abs(pred - rep.total) <= 1e-9 * max(1.0, abs(rep.total)),
                        f"{pred:.12g} vs {rep.total:.12g}"))
        perm = np.arange(scenario.n_ues)[::-1]
        relabelled = scenario.with_ues([scenario.ues[k] for k in perm])
        relabelled = Scenario(relabelled.ues, relabelled.orus, relabelled.horizon, scenario.rate_bps[perm],
                              relabelled.e_cp_watts, relabelled.e_comm_watts, relabelled.cycle_costs)
        from .problem import Assignment
        moved = Assignment(it.assignment.oru_of[perm], it.assignment.option_of[perm])
        other = objective(moved, relabelled, alpha).total
        results.append(("objective invariant under UE relabelling",
                        abs(other - rep.total) <= 1e-9 * max(1.0, abs(rep.total)), ""))

    size = search_space_size(scenario.n_orus, scenario.n_ues, scenario.horizon, len(scenario.catalog))
    if size <= ceiling:
        ex = solve_exhaustive(scenario, alpha, ceiling=ceiling)
        for name, out in (("iterative", it), ("oneshot", os_)):
            if ex.feasible and out.feasible:
                ok = ex.total <= out.total + 1e-9 * max(1.0, abs(out.total))
                results.append((f"exhaustive dominates {name}", ok, f"{ex.total:.6g} <= {out.total:.6g}"))
    else:
        results.append(("exhaustive dominance", True, f"skipped: {size:.2e} candidates over ceiling"))
    return results
