"""Batch driver: single runs, fault-injection campaigns, scaling sweeps.

Exit codes: 0 converged with a valid grouping, 1 grouping verdict false,
2 step budget exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .configs import ConfigError
from .experiments import (
    DescriptorError,
    SWEEP_COLUMNS,
    load_descriptor,
    run_descriptor,
    run_with_corruption,
    summary_record,
    sweep_rows,
    trace_jsonl,
    write_sweep_csv,
)
from .graphs import GraphError
from .runtime import ScheduleError

log = logging.getLogger("stabsim")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3


def _emit(result, out_dir: str | None, name: str) -> int:
    summary = summary_record(result)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, f"{name}.trace.jsonl"), "w", encoding="utf-8") as f:
            f.write(trace_jsonl(result))
        with open(os.path.join(out_dir, f"{name}.report.json"), "w", encoding="utf-8") as f:
            json.dump(result.report.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")
    print(json.dumps(summary, sort_keys=True))
    if not result.trace.terminated:
        return EXIT_BUDGET
    if not result.report.verdict:
        return EXIT_INVALID
    return EXIT_OK


def cmd_run(args) -> int:
    desc = load_descriptor(args.descriptor)
    result = run_descriptor(desc)
    return _emit(result, args.out_dir, "run")


def cmd_inject(args) -> int:
    desc = load_descriptor(args.descriptor)
    try:
        spec = json.loads(args.corrupt)
    except json.JSONDecodeError:
        with open(args.corrupt, "r", encoding="utf-8") as f:
            spec = json.load(f)
    try:
        variables = tuple(spec["variables"])
        count = int(spec["count"])
        seed = int(spec.get("seed", 0))
        at_step = int(spec.get("at_step", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise DescriptorError(f"bad corruption spec: {exc}") from exc
    result = run_with_corruption(desc, variables, count, seed, at_step)
    return _emit(result, args.out_dir, "inject")


def _parse_range(text: str) -> list[int]:
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        if len(parts) == 2:
            lo, hi = parts
            step = 1
        else:
            lo, hi, step = parts
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",")]


def cmd_sweep(args) -> int:
    ns = _parse_range(args.n)
    ks = _parse_range(args.k)
    seeds = list(range(args.seeds))
    rows = sweep_rows(args.family, ns, ks, seeds, args.max_steps)
    if args.out:
        write_sweep_csv(rows, args.out)
    else:
        print(",".join(SWEEP_COLUMNS))
        for row in rows:
            print(",".join(str(row[c]) for c in SWEEP_COLUMNS))
    failed = [r for r in rows if r["verdict"] != "ok"]
    for r in failed:
        log.error("failed: %s", r)
    return EXIT_INVALID if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabsim",
        description="Self-stabilizing grouping simulator and verdict suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one run descriptor")
    p_run.add_argument("descriptor")
    p_run.add_argument("--out-dir", default=None)
    p_run.set_defaults(func=cmd_run)

    p_inj = sub.add_parser("inject", help="run, corrupt mid-flight, re-verify")
    p_inj.add_argument("descriptor")
    p_inj.add_argument("--corrupt", required=True,
                       help="JSON spec or path: variables, count, seed, at_step")
    p_inj.add_argument("--out-dir", default=None)
    p_inj.set_defaults(func=cmd_inject)

    p_sw = sub.add_parser("sweep", help="instance sweep to CSV")
    p_sw.add_argument("--family", required=True,
                      choices=["path", "cycle", "grid", "random-gnp"])
    p_sw.add_argument("--n", required=True, help="range lo:hi[:step] or list a,b,c")
    p_sw.add_argument("--k", required=True, help="range or list")
    p_sw.add_argument("--seeds", type=int, default=5)
    p_sw.add_argument("--max-steps", type=int, default=None)
    p_sw.add_argument("--out", default=None)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("STABSIM_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DescriptorError, GraphError, ConfigError, ScheduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
