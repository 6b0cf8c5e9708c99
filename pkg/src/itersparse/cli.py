"""Command-line harness: generate instances, run solvers, sweep over n."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import classical, quantum
from .core import ContractError, MpcInstance, QueryLedger
from .errors import (InstanceFormatError, MwuBoundViolated, NoFeasibleIterate,
                     OracleContractBroken, RetryBudgetExceeded, SimplexCyclingError)
from .fileio import FORMATS, read_instance, write_instance
from .generate import KINDS, MPC_KINDS, generate_instance

OUT_ENV = "ITERSPARSE_OUT"
REPORT_NAME = "itersparse_report.csv"
COLUMNS = ["algorithm", "kind", "n", "d", "eps", "seed", "status", "objective", "iterations",
           "max_sublp", "row_reads", "q_charge", "wall_ms"]
ALGORITHMS = ("clarkson", "lowprec", "mpc", "qclarkson", "qlowprec1", "qlowprec2", "qmpc")
NEEDS_EPS = {"lowprec", "mpc", "qlowprec1", "qlowprec2", "qmpc"}
MPC_ALGORITHMS = {"mpc", "qmpc"}
INTERNAL_ERRORS = (OracleContractBroken, MwuBoundViolated, NoFeasibleIterate,
                   RetryBudgetExceeded, SimplexCyclingError)


class UsageError(Exception):
    pass


def _int_arg(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _int_list(text: str) -> list:
    return [_int_arg(t) for t in text.split(",") if t.strip()]


def out_dir() -> str:
    return os.environ.get(OUT_ENV, ".")


def run_algorithm(algorithm: str, inst, eps, seed: int, model: quantum.QueryCostModel):
    """Run one solver; returns (outcome, ledger, wall_ms)."""
    if (algorithm in MPC_ALGORITHMS) != isinstance(inst, MpcInstance):
        want = "a mixed packing/covering" if algorithm in MPC_ALGORITHMS else "an LP"
        raise UsageError(f"algorithm {algorithm} needs {want} instance")
    if algorithm in NEEDS_EPS and eps is None:
        raise UsageError(f"algorithm {algorithm} requires --eps")
    rng = np.random.default_rng([seed, 1])
    ledger = QueryLedger()
    start = time.perf_counter()
    if algorithm == "clarkson":
        out = classical.clarkson_solve(inst, rng, ledger)
    elif algorithm == "lowprec":
        out = classical.low_precision_solve(inst, eps, rng, ledger)
    elif algorithm == "mpc":
        out = classical.mpc_solve(inst, eps, rng, ledger)
    elif algorithm == "qclarkson":
        out = quantum.quantum_clarkson(inst, model, rng, ledger)
    elif algorithm == "qlowprec1":
        out = quantum.quantum_lp_one_sided(inst, eps, model, rng, ledger)
    elif algorithm == "qlowprec2":
        out = quantum.quantum_lp_two_sided(inst, eps, model, rng, ledger)
    else:
        out = quantum.quantum_mpc(inst, eps, model, rng, ledger)
    return out, ledger, (time.perf_counter() - start) * 1e3


def make_record(algorithm, kind, inst, eps, seed, out, ledger, wall_ms) -> dict:
    n = inst.n_c if isinstance(inst, MpcInstance) else inst.n
    return {
        "algorithm": algorithm, "kind": kind, "n": n, "d": inst.d,
        "eps": "" if eps is None else eps, "seed": seed, "status": out.status.value,
        "objective": "" if out.objective is None else repr(out.objective),
        "iterations": out.stats.iterations, "max_sublp": out.stats.max_sublp,
        "row_reads": ledger.classical_row_reads, "q_charge": ledger.quantum_query_charge,
        "wall_ms": round(wall_ms, 3),
    }


def append_csv(path: str, records: list) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        if new:
            w.writeheader()
        w.writerows(records)


def append_jsonl(path: str, items: list) -> None:
    with open(path, "a") as fh:
        for item in items:
            fh.write(json.dumps(item, sort_keys=True) + "\n")


def ledger_records(ledger: QueryLedger) -> list:
    return [asdict(r) for r in ledger.log]


def loglog_slope(ns, charges):
    """Least-squares slope of log(charge) against log(n); None if undefined."""
    ns = np.asarray(ns, dtype=float)
    cs = np.asarray(charges, dtype=float)
    if np.unique(ns).size < 2 or np.any(cs <= 0):
        return None
    return float(np.polyfit(np.log(ns), np.log(cs), 1)[0])


def _model(args) -> quantum.QueryCostModel:
    return quantum.QueryCostModel(charge_constant=args.charge_constant,
                                  polylog_exponent=args.polylog_exponent)


def _kind_label(inst) -> str:
    return "mpc" if isinstance(inst, MpcInstance) else "lp"


def cmd_gen(args) -> int:
    try:
        inst = generate_instance(args.kind, args.n, args.d, args.seed, n_p=args.n_p)
    except ContractError as exc:
        raise UsageError(str(exc)) from None
    path = args.out or os.path.join(out_dir(), f"{args.kind}_n{args.n}_d{args.d}_s{args.seed}.json")
    write_instance(path, inst, args.format)
    print(path)
    return 0


def cmd_solve(args) -> int:
    try:
        inst = read_instance(args.input)
    except (OSError, InstanceFormatError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    try:
        out, ledger, wall = run_algorithm(args.algorithm, inst, args.eps, args.seed, _model(args))
    except ContractError as exc:
        raise UsageError(str(exc)) from None
    rec = make_record(args.algorithm, _kind_label(inst), inst, args.eps, args.seed, out, ledger, wall)
    print(" ".join(f"{k}={rec[k]}" for k in COLUMNS))
    append_csv(args.report or os.path.join(out_dir(), REPORT_NAME), [rec])
    if args.jsonl:
        append_jsonl(args.jsonl, [dict(rec, ledger=ledger_records(ledger))])
    return 0


def default_kind(algorithm: str) -> str:
    return "mixed" if algorithm in MPC_ALGORITHMS else "feasible-nondegenerate"


def _sweep_task(task):
    algorithm, kind, n, d, eps, seed, trial, model = task
    trial_seed = seed * 1000 + trial
    inst = generate_instance(kind, n, d, trial_seed)
    out, ledger, wall = run_algorithm(algorithm, inst, eps, trial_seed, model)
    rec = make_record(algorithm, kind, inst, eps, trial_seed, out, ledger, wall)
    return (n, trial), rec


def cmd_sweep(args) -> int:
    kind = args.kind or default_kind(args.algorithm)
    if (args.algorithm in MPC_ALGORITHMS) != (kind in MPC_KINDS):
        raise UsageError(f"algorithm {args.algorithm} does not accept kind {kind}")
    if args.algorithm in NEEDS_EPS and args.eps is None:
        raise UsageError(f"algorithm {args.algorithm} requires --eps")
    if args.trials < 1 or args.parallel < 1:
        raise UsageError("--trials and --parallel must be at least 1")
    if not args.n or min(args.n) < args.d:
        raise UsageError("every n must be at least d")
    model = _model(args)
    tasks = [(args.algorithm, kind, n, args.d, args.eps, args.seed, t, model)
             for n in args.n for t in range(args.trials)]
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as ex:
            results = list(ex.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(t) for t in tasks]
    records = [rec for _, rec in sorted(results, key=lambda r: r[0])]
    slope = loglog_slope([r["n"] for r in records], [r["q_charge"] for r in records])
    w = csv.DictWriter(sys.stdout, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(records)
    slope_text = "n/a" if slope is None else f"{slope:.4f}"
    print(f"summary algorithm={args.algorithm} points={len(records)} slope={slope_text}")
    append_csv(args.report or os.path.join(out_dir(), REPORT_NAME), records)
    if args.jsonl:
        append_jsonl(args.jsonl, records + [{"summary": True, "algorithm": args.algorithm,
                                             "slope": slope, "points": len(records)}])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="itersparse", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance file")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--n", required=True, type=_int_arg)
    g.add_argument("--d", required=True, type=_int_arg)
    g.add_argument("--seed", type=_int_arg, default=0)
    g.add_argument("--n-p", type=_int_arg, default=2, help="packing rows for mixed kinds")
    g.add_argument("--format", choices=FORMATS, default="dense")
    g.add_argument("--out", help=f"output path (default: ${OUT_ENV} or the current directory)")
    g.set_defaults(func=cmd_gen)

    def common(p):
        p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
        p.add_argument("--eps", type=float)
        p.add_argument("--seed", type=_int_arg, default=0)
        p.add_argument("--charge-constant", type=float, default=1.0)
        p.add_argument("--polylog-exponent", type=_int_arg, default=1)
        p.add_argument("--report", help=f"CSV report to append to (default: ${OUT_ENV}/{REPORT_NAME})")
        p.add_argument("--jsonl", help="also append JSON records (with ledger entries) here")

    s = sub.add_parser("solve", help="solve one instance file")
    common(s)
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run generated instances over several n")
    common(w)
    w.add_argument("--n", required=True, type=_int_list, help="comma-separated, e.g. 1e3,1e4")
    w.add_argument("--d", required=True, type=_int_arg)
    w.add_argument("--kind", choices=KINDS)
    w.add_argument("--trials", type=_int_arg, default=1)
    w.add_argument("--parallel", type=_int_arg, default=1)
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "eps", None) is not None and not (args.eps > 0 and math.isfinite(args.eps)):
        parser.error("--eps must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"itersparse: error: {exc}", file=sys.stderr)
        return 2
    except INTERNAL_ERRORS as exc:
        seed = getattr(args, "seed", None)
        print(f"itersparse: internal error (seed={seed}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
