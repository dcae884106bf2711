"""Command-line entry point: ``trailblazer plan|bench|analyze|fit``.

Exit codes: 0 success, 2 invalid input, 3 oracle-call cap reached.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import bench, difficulty
from .baselines import SparseSamplingConfig
from .mdp import (ContractError, MdpFormatError, bounded_gap, load_mdp, make_continuous_toy,
                  make_random_mdp, power_law)

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


class _Invalid(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _profile(text: str):
    name, _, args = text.partition(":")
    try:
        vals = [float(x) for x in args.split(",") if x.strip()]
    except ValueError:
        raise _Invalid(f"bad profile parameters in {text!r}") from None
    if name == "bounded_gap" and len(vals) == 1:
        return bounded_gap(vals[0])
    if name == "power_law" and len(vals) in (1, 2):
        return power_law(*vals)
    raise _Invalid(f"unknown gap profile {text!r}; use bounded_gap:DMIN or power_law:B[,C]")


def _model(args):
    chosen = [x for x in (args.mdp, args.random, args.toy) if x is not None]
    if len(chosen) != 1:
        raise _Invalid("give exactly one of --mdp, --random, --toy")
    if args.mdp is not None:
        return load_mdp(args.mdp)
    if args.random is not None:
        try:
            seed, K, N, S = (int(x) for x in args.random.split(","))
        except ValueError:
            raise _Invalid("--random expects SEED,K,N,S") from None
        return make_random_mdp(seed, S, K, N, gamma=args.gamma)
    return make_continuous_toy(args.toy_seed, _profile(args.toy), gamma=args.gamma)


def _add_source(p: argparse.ArgumentParser, toy: bool = True) -> None:
    p.add_argument("--mdp", metavar="FILE", help="tabular MDP in JSON")
    p.add_argument("--random", metavar="SEED,K,N,S", help="generated tabular MDP")
    if toy:
        p.add_argument("--toy", metavar="PROFILE", help="continuous toy: bounded_gap:DMIN or power_law:B[,C]")
        p.add_argument("--toy-seed", type=int, default=0, help="seed for the toy's root state")
    else:
        p.set_defaults(toy=None, toy_seed=0)
    p.add_argument("--gamma", type=float, default=0.5, help="discount for --random/--toy (default 0.5)")


def _add_planner(p: argparse.ArgumentParser) -> None:
    p.add_argument("--planner", choices=bench.PLANNERS, default="trailblazer")
    p.add_argument("--cap", type=int, default=None, help="oracle-call cap")
    p.add_argument("--width", type=int, default=16, help="sparse sampling width C")
    p.add_argument("--horizon", type=int, default=4, help="sparse sampling horizon H")
    p.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trailblazer", description="Monte-Carlo planning with a generative model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="single planning run")
    _add_source(p)
    _add_planner(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON record here instead of stdout")

    b = sub.add_parser("bench", help="PAC grid experiment")
    _add_source(b)
    _add_planner(b)
    b.add_argument("--eps", type=_floats, required=True, metavar="LIST")
    b.add_argument("--delta", type=_floats, default=[0.1], metavar="LIST")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    b.add_argument("--out", required=True)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--timing", action="store_true", help="include wall times (reports stop being byte-reproducible)")

    a = sub.add_parser("analyze", help="difficulty report for a tabular MDP")
    _add_source(a, toy=False)
    a.add_argument("--hcap", type=int, default=4)
    a.add_argument("--hgrid", type=_floats, default=[2, 4, 6], metavar="LIST")
    a.add_argument("--xi", type=float, default=None)
    a.add_argument("--samples", type=int, default=2000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--path-cap", type=int, default=difficulty.DEFAULT_PATH_CAP)
    a.add_argument("--out")

    f = sub.add_parser("fit", help="complexity exponent of an existing report")
    f.add_argument("report")
    f.add_argument("--out")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_plan(args) -> int:
    spec = bench.ExperimentSpec(_model(args), [args.eps], [args.delta], 1, args.seed, args.planner,
                                args.cap, SparseSamplingConfig(args.width, args.horizon), args.engine)
    (rec,) = bench.run_pac_experiment(spec)
    row = rec.row()
    _emit(json.dumps(row), args.out)
    return EXIT_BUDGET if rec.budget_exceeded else EXIT_OK


def _cmd_bench(args) -> int:
    spec = bench.ExperimentSpec(_model(args), args.eps, args.delta, args.trials, args.seed, args.planner,
                                args.cap, SparseSamplingConfig(args.width, args.horizon), args.engine)
    records = bench.run_pac_experiment(spec)
    bench.emit_report(records, args.format, args.out, timing=args.timing)
    for c in bench.summarize(records):
        fails = "n/a" if c.failures is None else c.failures
        print(f"eps={c.epsilon} delta={c.delta} trials={c.trials} failures={fails} bound={c.failure_bound} "
              f"mean_calls={c.mean_calls:.6g} max_depth={c.max_depth} capped={c.budget_exceeded}",
              file=sys.stderr)
    return EXIT_BUDGET if any(r.budget_exceeded for r in records) else EXIT_OK


def _cmd_analyze(args) -> int:
    mdp = _model(args)
    report = difficulty.analyze(mdp, args.hcap, [int(h) for h in args.hgrid], args.xi, args.samples,
                                args.seed, args.path_cap)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def _cmd_fit(args) -> int:
    try:
        rows = bench.read_report(args.report)
    except (OSError, ValueError, KeyError) as exc:
        raise _Invalid(f"cannot read report {args.report}: {exc}") from None
    fit = bench.fit_complexity_exponent(bench.records_from_rows(rows))
    _emit(json.dumps(asdict(fit)), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"plan": _cmd_plan, "bench": _cmd_bench, "analyze": _cmd_analyze, "fit": _cmd_fit}[args.command]
    try:
        return handler(args)
    except (_Invalid, ContractError, MdpFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
