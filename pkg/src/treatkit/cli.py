"""Command-line entry point: ``treatkit {design,prepare,crossframe,inspect}``.

Every output file is written atomically, so a failing command never leaves
a partial plan or frame behind.  Randomness comes from ``--seed``, else the
``TREATKIT_SEED`` environment variable, else a freshly drawn seed that is
echoed to stderr.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys

from .crossframe import mk_cross_frame_c, mk_cross_frame_n
from .design import BINOMIAL, NO_TARGET, NUMERIC, Controls, design
from .exceptions import TreatError
from .frame import Schema, atomic_write_text, read_csv, to_csv_text
from .prepare import prepare
from .serde import dumps_plan, load_plan
from .splits import ONEWAY, load_split_plan

SEED_ENV = "TREATKIT_SEED"


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _resolve_seed(seed) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise TreatError(f"{SEED_ENV}={env!r} is not an integer") from None
    drawn = secrets.randbits(63)
    print(f"seed: {drawn}", file=sys.stderr)
    return drawn


def _controls(args) -> Controls:
    return Controls(min_fraction=args.min_fraction, rare_count=args.rare_count,
                    rare_sig=args.rare_sig, sm_factor=args.sm_factor,
                    ncross=getattr(args, "ncross", 3))


def _read(args):
    schema = Schema.load(args.schema) if getattr(args, "schema", None) else None
    return read_csv(args.data, schema)


def cmd_design(args) -> int:
    frame = _read(args)
    seed = _resolve_seed(args.seed) if args.task != NO_TARGET else 0
    plan, _, _ = design(frame, _names(args.vars), args.task, args.outcome, args.target,
                        _controls(args), seed, None, args.workers)
    atomic_write_text(args.out, dumps_plan(plan))
    sys.stdout.write(plan.score_frame_csv())
    return 0


def cmd_prepare(args) -> int:
    plan = load_plan(args.plan)
    # read inputs with the design-time kinds so a type change is reported by name
    frame = read_csv(args.data, Schema(dict(plan.var_kinds)))
    restrict = _names(args.vars) if args.vars is not None else None
    treated = prepare(plan, frame, prune_sig=args.prune_sig, var_restriction=restrict,
                      scale=args.scale)
    atomic_write_text(args.out, to_csv_text(treated))
    return 0


def cmd_crossframe(args) -> int:
    frame = _read(args)
    seed = _resolve_seed(args.seed)
    splits = load_split_plan(args.split_plan, frame.nrows) if args.split_plan else None
    controls = _controls(args)
    if args.task == NUMERIC:
        res = mk_cross_frame_n(frame, _names(args.vars), args.outcome, controls, splits,
                               seed=seed, workers=args.workers)
    else:
        res = mk_cross_frame_c(frame, _names(args.vars), args.outcome, args.target, controls,
                               splits, seed=seed, workers=args.workers)
    if res.method == ONEWAY and splits is None:
        print(f"note: {frame.nrows} rows < 2 * ncross ({args.ncross}); "
              "using one-way holdout", file=sys.stderr)
    plan_text = dumps_plan(res.treatments)
    atomic_write_text(args.out_frame, to_csv_text(res.cross_frame))
    atomic_write_text(args.out_plan, plan_text)
    print(res.eval_sets.summary())
    return 0


def cmd_inspect(args) -> int:
    plan = load_plan(args.plan)
    print(f"task: {plan.task}")
    print(f"outcome: {plan.outcome_name}")
    if plan.target_level is not None:
        print(f"target: {plan.target_level}")
    print(f"inputs: {', '.join(f'{k} ({v})' for k, v in plan.var_kinds.items())}")
    sys.stdout.write(plan.score_frame_csv())
    return 0


def _add_design_controls(p):
    p.add_argument("--min-fraction", type=float, default=0.02)
    p.add_argument("--rare-count", type=int, default=0)
    p.add_argument("--rare-sig", type=float, default=None)
    p.add_argument("--sm-factor", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--schema", help="JSON column schema for the data file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treatkit",
                                     description="Design and apply data treatment plans.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="design a treatment plan, print its scoreFrame")
    p.add_argument("--task", required=True, choices=[NUMERIC, BINOMIAL, NO_TARGET])
    p.add_argument("--data", required=True)
    p.add_argument("--vars", required=True, help="comma-separated input columns")
    p.add_argument("--outcome")
    p.add_argument("--target")
    _add_design_controls(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("prepare", help="apply a saved plan to a CSV file")
    p.add_argument("--plan", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--prune-sig", type=float, default=None)
    p.add_argument("--vars", help="comma-separated derived variables to keep")
    p.add_argument("--scale", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("crossframe", help="plan plus out-of-sample training frame")
    p.add_argument("--task", required=True, choices=[NUMERIC, BINOMIAL])
    p.add_argument("--data", required=True)
    p.add_argument("--vars", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--target")
    p.add_argument("--ncross", type=int, default=3)
    p.add_argument("--split-plan", help="JSON file of {train, app} folds")
    _add_design_controls(p)
    p.add_argument("--out-frame", required=True)
    p.add_argument("--out-plan", required=True)
    p.set_defaults(func=cmd_crossframe)

    p = sub.add_parser("inspect", help="print a saved plan's summary and scoreFrame")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    task = getattr(args, "task", None)
    if task == BINOMIAL and args.target is None:
        parser.error("--target is required for --task binomial")
    if task in (NUMERIC, BINOMIAL) and not args.outcome:
        parser.error(f"--outcome is required for --task {task}")
    try:
        return args.func(args)
    except (TreatError, OSError) as e:
        print(f"treatkit {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
