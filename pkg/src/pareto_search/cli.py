"""Command-line entry point: ``pareto-search <command> ...``.

Commands
  frontier  box-perfect | box-imperfect | line   closed-form Pareto frontiers
  oracle    LP frontier of the permutation game (n <= 8)
  verify    numerical self-checks
  simulate  Monte-Carlo estimate for one strategy

Exit codes: 0 success, 1 verification failure, 2 usage or instance error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import box_imperfect as bi
from . import box_perfect as bp
from . import line_search as ls
from .core import BoxInstance, InstanceError, ParetoCurve, load_instance, make_instance
from .matrix_game import SolverWarning, trace_frontier
from .montecarlo import StarvationError, estimate_CR_box
from .verify import SCOPES, run_checks

log = logging.getLogger("pareto_search")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict
    table: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"command": self.command, "version": __version__, "inputs": self.inputs,
                "table": self.table, **self.extra, "warnings": self.warnings,
                "seconds": round(self.seconds, 6)}


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated box indices, got {text!r}")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included when hit) or a comma list."""
    if ":" not in text:
        return _floats(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _instance(args, default_q: float = 1.0) -> BoxInstance:
    if getattr(args, "instance", None):
        inst = load_instance(args.instance)
        if args.q is not None and args.q != inst.q:
            inst = make_instance(inst.times, args.q, inst.prediction)
        return inst
    if args.times is None or args.pred is None:
        raise UsageError("give --times and --pred, or --instance FILE")
    return make_instance(args.times, default_q if args.q is None else args.q, args.pred)


def _add_instance_args(p: argparse.ArgumentParser, with_q: bool = True) -> None:
    p.add_argument("--times", type=_floats, help="search times, e.g. 1,2,3")
    p.add_argument("--pred", type=_ints, help="predicted boxes (0-based), e.g. 0,2")
    if with_q:
        p.add_argument("--q", type=float, default=None, help="detection probability")
    p.add_argument("--instance", help="JSON instance file with times, q, prediction")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _curve_table(curve: ParetoCurve) -> list[dict]:
    return [p.to_dict() for p in curve]


def cmd_frontier(args) -> RunReport:
    if args.family == "box-perfect":
        inst = _instance(args)
        if not inst.perfect:
            raise UsageError("box-perfect needs q = 1; use box-imperfect")
        curve, seg = bp.frontier_perfect(inst, args.points)
        extra = {"segment": {"t_h": seg.t_h, "t_hc": seg.t_hc, "rhs": seg.rhs,
                             "c_min": seg.c_min, "c_max": seg.c_max}}
        return RunReport("frontier box-perfect", inst.to_dict(), _curve_table(curve), extra)
    if args.family == "box-imperfect":
        inst = _instance(args)
        fr, curve = bi.frontier_imperfect(inst, args.kmax, args.points)
        extra = {"segments": [asdict(s) for s in fr.segments],
                 "uncovered": list(fr.uncovered)}
        return RunReport("frontier box-imperfect", inst.to_dict(), _curve_table(curve), extra)
    grid = args.lambda_grid or parse_grid("0.05:0.95:0.05")
    curve = ls.frontier_line(grid)
    return RunReport("frontier line", {"lambda_grid": grid}, _curve_table(curve))


def cmd_oracle(args) -> RunReport:
    inst = _instance(args)
    if not inst.perfect:
        raise UsageError("the permutation oracle covers perfect detection only")
    if inst.n > 8:
        raise UsageError("exhaustive oracle limited to n <= 8")
    grid = args.lambda_grid or np.geomspace(1e-3, 1e3, 25).tolist()
    pg = bp.permutation_game(inst)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SolverWarning)
        curve = trace_frontier(pg, grid, args.tol)
    seg = bp.frontier_segment(inst)
    dev = max(seg.distance(p.consistency, p.robustness) for p in curve)
    rep = RunReport("oracle", inst.to_dict(), _curve_table(curve),
                    {"max_distance_to_closed_form": dev})
    rep.warnings = [str(w.message) for w in caught]
    return rep


def cmd_verify(args) -> RunReport:
    scopes = args.scope or list(SCOPES)
    results = run_checks(scopes, args.seed, args.inject_sign_flip)
    rep = RunReport("verify", {"scopes": scopes, "seed": args.seed,
                               "inject_sign_flip": args.inject_sign_flip},
                    [r.to_dict() for r in results])
    rep.extra["passed"] = all(r.passed for r in results)
    return rep


def cmd_simulate(args) -> RunReport:
    if args.family == "line":
        if args.alpha is None or args.mu is None or args.y is None:
            raise UsageError("line simulation needs --alpha, --mu and --y")
        strat = ls.BiasedGeometricStrategy(args.alpha, args.mu)
        c_ub, r_ub = ls.upper_bounds(args.alpha, args.mu)
        table = []
        for y in args.y:
            est = ls.expected_ratio_biased(strat, y, args.trials, args.seed)
            table.append({"y": y, "mean": est.mean, "stderr": est.stderr, "trials": est.trials})
        return RunReport("simulate line", {"alpha": args.alpha, "mu": args.mu, "y": args.y,
                                           "trials": args.trials, "seed": args.seed},
                         table, {"consistency_bound": c_ub, "robustness_bound": r_ub})
    inst = _instance(args)
    if args.family == "box-perfect":
        if args.alpha is None:
            raise UsageError("box-perfect simulation needs --alpha")
        sampler = bp.sstar_sampler(inst, args.alpha)
        exact = bp.expected_times_sstar(inst, args.alpha)
        params = {"alpha": args.alpha}
    else:
        if args.k is None or args.beta is None:
            raise UsageError("box-imperfect simulation needs --k and --beta")
        sampler = bi.sk_sampler(inst, args.k, args.beta)
        exact = bi.expected_times_sk(inst, args.k, args.beta)
        params = {"k": args.k, "beta": args.beta}
    est = estimate_CR_box(sampler, inst, args.trials, args.seed)
    table = [{"box": j, "in_prediction": j in inst.prediction, "mean": e.mean,
              "stderr": e.stderr} for j, e in enumerate(est.per_box)]
    extra = {"consistency": {"mean": est.consistency.mean, "stderr": est.consistency.stderr},
             "robustness": {"mean": est.robustness.mean, "stderr": est.robustness.stderr},
             "closed_form": {"consistency": exact[0], "robustness": max(exact)}}
    inputs = inst.to_dict() | params | {"trials": args.trials, "seed": args.seed}
    return RunReport(f"simulate {args.family}", inputs, table, extra)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _csv(rep: RunReport) -> str:
    buf = io.StringIO()
    if rep.command.startswith(("frontier", "oracle")):
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["consistency", "robustness", "params"])
        for row in rep.table:
            w.writerow([repr(row["consistency"]), repr(row["robustness"]),
                        json.dumps(row["params"], sort_keys=True)])
        return buf.getvalue()
    keys = list(rep.table[0]) if rep.table else []
    w = csv.DictWriter(buf, keys, lineterminator="\n")
    w.writeheader()
    w.writerows(rep.table)
    return buf.getvalue()


def _emit(rep: RunReport, args) -> None:
    text = _csv(rep) if args.format == "csv" else json.dumps(rep.to_dict(), indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pareto-search", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    fr = sub.add_parser("frontier", help="closed-form Pareto frontier")
    fr.add_argument("family", choices=("box-perfect", "box-imperfect", "line"))
    _add_instance_args(fr)
    fr.add_argument("--kmax", type=int, default=10, help="last segment index (box-imperfect)")
    fr.add_argument("--points", type=int, default=11, help="points per segment")
    fr.add_argument("--lambda-grid", type=parse_grid, help="start:stop:step, values in (0, 1) for line")
    _add_output_args(fr)
    fr.set_defaults(func=cmd_frontier)

    orc = sub.add_parser("oracle", help="LP frontier of the permutation game")
    _add_instance_args(orc, with_q=False)
    orc.set_defaults(q=None)
    orc.add_argument("--lambda-grid", type=parse_grid, help="weights on robustness (default 1e-3..1e3)")
    orc.add_argument("--tol", type=float, default=1e-9)
    _add_output_args(orc)
    orc.set_defaults(func=cmd_oracle)

    ver = sub.add_parser("verify", help="numerical self-checks")
    ver.add_argument("--scope", action="append", choices=SCOPES,
                     help="repeatable; default runs every scope")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--inject-sign-flip", action="store_true",
                     help="check the greedy oracle against the minus-k form (must fail)")
    ver.add_argument("--format", choices=("csv", "json"), default="json")
    ver.add_argument("-o", "--output")
    ver.set_defaults(func=cmd_verify)

    sim = sub.add_parser("simulate", help="Monte-Carlo estimate for one strategy")
    sim.add_argument("family", choices=("box-perfect", "box-imperfect", "line"))
    _add_instance_args(sim)
    sim.add_argument("--alpha", type=float, help="mixing weight (box-perfect) or base (line)")
    sim.add_argument("--k", type=int)
    sim.add_argument("--beta", type=float)
    sim.add_argument("--mu", type=float)
    sim.add_argument("--y", type=_floats, help="hider positions for line, e.g. 10,-10")
    sim.add_argument("--trials", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--format", choices=("csv", "json"), default="json")
    sim.add_argument("-o", "--output")
    sim.set_defaults(func=cmd_simulate)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        rep = args.func(args)
    except (UsageError, InstanceError, ValueError, OSError) as exc:
        print(f"pareto-search: error: {exc}", file=sys.stderr)
        return 2
    except StarvationError as exc:
        print(f"pareto-search: simulation failed: {exc}", file=sys.stderr)
        return 1
    rep.seconds = time.perf_counter() - start
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(rep, args)
    if args.command == "verify":
        for row in rep.table:
            if not row["passed"]:
                print(f"FAIL [{row['scope']}] {row['name']}: residual {row['residual']:.3e} "
                      f"> {row['tolerance']:.1e}", file=sys.stderr)
        return 0 if rep.extra["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
