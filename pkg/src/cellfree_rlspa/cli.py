"""Command-line entry point: ``cellfree-rlspa {run,sweep-lambda,flops,validate}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import harness
from .errors import ConfigError

DEFAULT_SWEEP = (0.0, 0.5, 1.0, 2.0, 5.0)


def _load(args) -> harness.ExperimentSpec:
    spec = harness.load_spec(args.config) if args.config else harness.ExperimentSpec()
    base = spec.base
    if args.seed is not None:
        base = base.replace(seed=args.seed)
    changes = {"base": base}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["output_path"] = args.out
    if args.threads is not None:
        changes["threads"] = args.threads
    return dataclasses.replace(spec, **changes)


def cmd_run(args) -> int:
    spec = _load(args)
    table = harness.run_experiment(spec)
    table.complexity = harness.default_complexity(base=spec.base)
    path = harness.emit(table, harness.resolve_output(spec.output_path), spec)
    for row in table.rows:
        print(f"{row.method:12s} {row.snr_db:6.1f} dB  mean={row.mean_sr:.6g}  std={row.std_sr:.3g}")
    print(f"wrote {path}")
    return 1 if table.errors else 0


def cmd_sweep(args) -> int:
    spec = _load(args)
    if not spec.lambda_sweep:
        spec = dataclasses.replace(spec, lambda_sweep=DEFAULT_SWEEP)
    table = harness.lambda_sweep(spec)
    path = harness.emit(table, harness.resolve_output(spec.output_path), spec)
    for row in table.rows:
        print(f"{row.method:20s} {row.snr_db:6.1f} dB  mean={row.mean_sr:.6g}")
    print(f"wrote {path}")
    return 1 if table.errors else 0


def cmd_flops(args) -> int:
    spec = _load(args)
    rows = harness.default_complexity(L_values=args.L, base=spec.base)
    for m in rows:
        print(f"{m.method:12s} M={m.params[0]:4d} flops={m.flops:,.0f}")
    if args.out:
        print(f"wrote {harness.emit_complexity(rows, harness.resolve_output(args.out))}")
    return 0


def cmd_validate(args) -> int:
    from . import validation

    results = validation.run_all(ordering_trials=args.trials or 200)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellfree-rlspa",
        description="Robust LS power allocation experiments for cell-free massive MIMO.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [system] and [experiment] sections")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (overrides config)")
    common.add_argument("--out", help="output CSV path (overrides config)")
    common.add_argument("--threads", type=int, help="worker threads")

    sub.add_parser("run", parents=[common], help="sum-rate experiment").set_defaults(func=cmd_run)
    sub.add_parser("sweep-lambda", parents=[common], help="regularization sweep").set_defaults(
        func=cmd_sweep
    )
    flops = sub.add_parser("flops", parents=[common], help="complexity table")
    flops.add_argument("--L", type=int, nargs="+", default=[10, 15, 20, 25, 30, 40, 50])
    flops.set_defaults(func=cmd_flops)
    sub.add_parser("validate", parents=[common], help="run the oracle checks").set_defaults(
        func=cmd_validate
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return 2
    except (ArithmeticError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
