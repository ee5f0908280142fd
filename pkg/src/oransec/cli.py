"""Command-line entry point: ``oransec <subcommand>``.

Exit status is 0 when every requested solve completed, including solves that
report infeasibility, and 1 on bad input or a failed invariant.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, harness
from .harness import RunManifest
from .scenario import GenParams, ScenarioFormatError, dumps, generate
from .solvers import IterativeConfig, OneShotConfig, SearchSpaceTooLarge


def _add_scenario_args(p: argparse.ArgumentParser, many: bool = True) -> None:
    if many:
        p.add_argument("--seeds", type=int, nargs="*", default=[0], help="generator seeds")
    else:
        p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--scenario", help="scenario JSON file or builtin:<name>; overrides the generator")
    p.add_argument("--params", help="JSON file of generator parameters")
    p.add_argument("--n-ues", type=int)
    p.add_argument("--n-orus", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--resource-blocks", type=int)


def _add_solver_args(p: argparse.ArgumentParser, solvers: bool = True) -> None:
    if solvers:
        p.add_argument("--solvers", nargs="+", default=["iterative", "oneshot"], choices=harness.SOLVERS)
    p.add_argument("--normalization", choices=("cell", "global"), default="cell")
    p.add_argument("--ceiling", type=int, default=10**8, help="exhaustive enumeration ceiling")
    p.add_argument("--epsilon", type=float, help="iterative stopping tolerance")
    p.add_argument("--u-max", type=int, help="iterative iteration cap")
    p.add_argument("--x-init", choices=("best_rate", "round_robin", "seeded"))
    p.add_argument("--pair-epsilon", type=float, help="one-shot pairwise-product bound")
    p.add_argument("--max-iterations", type=int, help="one-shot descent iteration cap")
    p.add_argument("--rounding", choices=("floor", "nearest_feasible"))


def _gen_params(args) -> GenParams:
    params = GenParams()
    if getattr(args, "params", None):
        params = GenParams.from_dict(json.loads(Path(args.params).read_text(encoding="utf-8")))
    overrides = {k: getattr(args, a) for k, a in (("n_ues", "n_ues"), ("n_orus", "n_orus"), ("horizon", "horizon"),
                                                   ("resource_blocks", "resource_blocks"))
                 if getattr(args, a, None) is not None}
    return replace(params, **overrides)


def _configs(args):
    it = {k: v for k, v in (("epsilon", args.epsilon), ("u_max", args.u_max), ("x_init", args.x_init))
          if v is not None}
    os_ = {k: v for k, v in (("epsilon_pair", args.pair_epsilon), ("max_iterations", args.max_iterations),
                             ("rounding", args.rounding)) if v is not None}
    return IterativeConfig(**it), OneShotConfig(**os_)


def _manifest(args, experiment: str, **extra) -> RunManifest:
    if getattr(args, "manifest", None):
        data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        data["output_dir"] = args.out_dir or data.get("output_dir")
        return RunManifest.from_dict(data)
    it, os_ = _configs(args)
    return RunManifest(experiment=experiment, seeds=tuple(args.seeds), params=_gen_params(args),
                       solvers=tuple(getattr(args, "solvers", ("iterative",))), iterative=it, oneshot=os_,
                       scenario=args.scenario, normalization=args.normalization, ceiling=args.ceiling,
                       output_dir=args.out_dir, **extra)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oransec", description="Security/latency trade-off experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a scenario file")
    _add_scenario_args(p, many=False)
    p.add_argument("-o", "--output", help="write here instead of stdout")

    p = sub.add_parser("solve", help="solve one scenario")
    _add_scenario_args(p, many=False)
    _add_solver_args(p, solvers=False)
    p.add_argument("--solver", choices=harness.SOLVERS, default="iterative")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("-o", "--output", help="write the result JSON here instead of stdout")

    for name, helptext in (("sweep-alpha", "sweep the latency weight"),
                           ("sweep-w", "sweep a common O-RU security requirement"),
                           ("sweep-resources", "compare resource tiers"),
                           ("trace-convergence", "objective per iteration of the alternating solver"),
                           ("trace-battery", "remaining battery per step")):
        p = sub.add_parser(name, help=helptext)
        _add_scenario_args(p)
        _add_solver_args(p, solvers=name != "trace-convergence")
        p.add_argument("--manifest", help="run a saved manifest; other flags except --out-dir are ignored")
        p.add_argument("--out-dir", help="directory for CSV, manifest.json and timings.csv")
        if name == "sweep-alpha":
            p.add_argument("--alphas", type=float, nargs="*", default=[0.1, 0.3, 0.5, 0.7, 0.9])
        else:
            p.add_argument("--alpha", type=float, default=0.1 if name in ("sweep-resources", "trace-battery")
                           else 0.5)
        if name == "sweep-w":
            p.add_argument("--w", type=float, nargs="*", default=[6.0, 7.0, 8.0, 12.0], help="security levels, bits")
        if name == "sweep-resources":
            p.add_argument("--tiers", nargs="+", default=["low", "medium", "high"], choices=("low", "medium", "high"))
        if name == "trace-battery":
            p.set_defaults(solvers=["myopic", "iterative"])

    p = sub.add_parser("verify", help="run the invariant checks on one scenario")
    _add_scenario_args(p, many=False)
    p.add_argument("--alpha", type=float, default=0.5)
    return parser


def _single_scenario(args):
    if args.scenario:
        return harness._scenario_source(args.scenario)
    return generate(replace(_gen_params(args), seed=args.seed))


def _print_rows(rows, columns):
    sys.stdout.write(harness.to_csv(rows, columns))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, ScenarioFormatError, SearchSpaceTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "gen":
        text = dumps(_single_scenario(args))
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    if cmd == "solve":
        scen = _single_scenario(args)
        it, os_ = _configs(args)
        manifest = RunManifest("solve", solvers=(args.solver,), iterative=it, oneshot=os_,
                               normalization=args.normalization, ceiling=args.ceiling)
        outcome = harness.run_solver(args.solver, scen, args.alpha, manifest)
        result = {"solver": args.solver, "alpha": args.alpha, "status": outcome.status.value,
                  "diagnostic": outcome.diagnostic, "evaluations": outcome.evaluations,
                  "wall_time_s": outcome.wall_time}
        if outcome.feasible:
            result.update(assignment=outcome.assignment.to_dict(), total=outcome.report.total,
                          mean_norm_latency=outcome.report.mean_norm_latency,
                          mean_norm_security=outcome.report.mean_norm_security)
        if outcome.failed_step is not None:
            result["failed_step"] = outcome.failed_step
        text = json.dumps(result, indent=2) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    if cmd == "verify":
        results = harness.verify(_single_scenario(args), args.alpha)
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
        return 0 if all(ok for _, ok, _ in results) else 1

    if cmd == "sweep-alpha":
        manifest = _manifest(args, "sweep-alpha", alphas=tuple(args.alphas))
        columns = harness.ALPHA_COLUMNS
    elif cmd == "sweep-w":
        manifest = _manifest(args, "sweep-w", w_grid=tuple(args.w), alpha=args.alpha)
        columns = harness.W_COLUMNS
    elif cmd == "sweep-resources":
        manifest = _manifest(args, "sweep-resources", tiers=tuple(args.tiers), alpha=args.alpha)
        columns = harness.TIER_COLUMNS
    elif cmd == "trace-convergence":
        manifest = _manifest(args, "trace-convergence", alpha=args.alpha)
        columns = harness.CONVERGENCE_COLUMNS
    else:
        manifest = _manifest(args, "trace-battery", alpha=args.alpha)
        columns = harness.BATTERY_COLUMNS
    rows = harness.run(manifest)
    if manifest.output_dir is None:
        _print_rows(rows, columns)
    return 0


if __name__ == "__main__":
    sys.exit(main())
