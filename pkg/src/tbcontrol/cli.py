"""Command line front end.

Subcommands: simulate (no controls), solve (full sweep), r0,
sensitivity, sweep and catalog. A scenario comes from --scenario (a
builtin name) or --config (a file), defaulting to the baseline; --set
key=value tweaks any config key on top. Summaries go to stdout as CSV or
JSON; trajectory files are written only when --out is given.

Exit codes: 0 success, 1 usage or configuration problem, 2 solver
non-convergence under --strict, 3 numerical failure inside a solve.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .errors import ConfigError, DivergenceError, InvalidInputError, NumericalError
from .harness import (
    ScenarioSpec,
    apply_overrides,
    builtin_scenarios,
    default_spec,
    get_scenario,
    load_config,
    run_scenario,
    run_sweep,
)
from .model import PARAMETER_FIELDS
from .reproduction import r0_report, sensitivity_numeric

__all__ = ["main", "entry_point"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise _UsageError(message)


def _add_spec_options(parser, with_output: bool):
    parser.add_argument("--config", metavar="PATH", help="scenario config file")
    parser.add_argument("--scenario", metavar="NAME", help="builtin scenario name")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="stdout format"
    )
    if with_output:
        parser.add_argument("--out", metavar="DIR", help="directory for output files")
        parser.add_argument("--steps", type=int, metavar="N", help="override grid steps")


def _build_parser() -> _Parser:
    parser = _Parser(prog="tbcontrol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the dynamics with controls off")
    _add_spec_options(p, with_output=True)

    p = sub.add_parser("solve", help="run the forward-backward sweep")
    _add_spec_options(p, with_output=True)
    p.add_argument("--strict", action="store_true", help="exit 2 on non-convergence")

    p = sub.add_parser("r0", help="basic reproduction number with and without controls")
    _add_spec_options(p, with_output=False)
    p.add_argument(
        "--method",
        choices=("closed_form", "ngm"),
        default="closed_form",
        help="evaluation method",
    )

    p = sub.add_parser("sensitivity", help="normalized sensitivity indices of R0")
    _add_spec_options(p, with_output=False)
    p.add_argument(
        "--parameter",
        dest="parameters",
        action="append",
        metavar="NAME",
        help="parameter to differentiate (repeatable; default: all model parameters)",
    )
    p.add_argument("--u1", type=float, default=0.0, help="control level for u1")
    p.add_argument("--u2", type=float, default=0.0, help="control level for u2")

    p = sub.add_parser("sweep", help="re-run a scenario over a list of values")
    _add_spec_options(p, with_output=True)
    p.add_argument("--parameter", required=True, metavar="NAME")
    p.add_argument("--values", required=True, metavar="V1,V2,...")
    p.add_argument("--strict", action="store_true", help="exit 2 on non-convergence")

    p = sub.add_parser("catalog", help="list the builtin scenarios")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser


def _resolve_spec(args) -> ScenarioSpec:
    if args.config and args.scenario:
        raise ConfigError("--config and --scenario are mutually exclusive")
    if args.config:
        spec = load_config(args.config)
    elif args.scenario:
        spec = get_scenario(args.scenario)
    else:
        spec = default_spec()
    if args.overrides:
        spec = apply_overrides(spec, args.overrides)
    if getattr(args, "steps", None) is not None:
        if args.steps < 1:
            raise ConfigError(f"--steps must be positive, got {args.steps}")
        spec = spec.replace(n_steps=args.steps)
    return spec


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{full}."))
        else:
            flat[full] = value
    return flat


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(records: list, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(records, indent=2, sort_keys=True))
        return
    rows = [_flatten(r) for r in records]
    keys = sorted({k for row in rows for k in row})
    for first in ("scenario", "parameter"):
        if first in keys:
            keys.remove(first)
            keys.insert(0, first)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(keys)
    for row in rows:
        writer.writerow([_cell(row[k]) if k in row else "" for k in keys])


def _cmd_simulate(args) -> int:
    spec = _resolve_spec(args).replace(u1_enabled=False, u2_enabled=False)
    outcome = run_scenario(spec, out_dir=args.out)
    _emit([outcome.summary()], args.format)
    return 0


def _cmd_solve(args) -> int:
    spec = _resolve_spec(args)
    outcome = run_scenario(spec, out_dir=args.out)
    _emit([outcome.summary()], args.format)
    if args.strict and not outcome.result.converged:
        print(f"error: scenario {spec.name!r} did not converge", file=sys.stderr)
        return 2
    return 0


def _cmd_r0(args) -> int:
    spec = _resolve_spec(args)
    records = []
    for u1, u2 in ((0.0, 0.0), (1.0, 1.0)):
        report = r0_report(spec.params, u1, u2, method=args.method)
        records.append(
            {
                "scenario": spec.name,
                "u1": u1,
                "u2": u2,
                "r0": report.value,
                "classification": report.classification,
                "method": report.method,
            }
        )
    _emit(records, args.format)
    return 0


def _cmd_sensitivity(args) -> int:
    spec = _resolve_spec(args)
    names = args.parameters if args.parameters else list(PARAMETER_FIELDS)
    records = []
    for name in names:
        index = sensitivity_numeric(spec.params, name, u1=args.u1, u2=args.u2)
        records.append({"parameter": index.parameter, "index": index.value})
    _emit(records, args.format)
    return 0


def _parse_values(raw: str) -> list:
    values = []
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            values.append(float(piece))
        except ValueError:
            raise ConfigError(f"--values entry {piece!r} is not a number") from None
    if not values:
        raise ConfigError("--values must contain at least one number")
    return values


def _cmd_sweep(args) -> int:
    spec = _resolve_spec(args)
    outcomes = run_sweep(spec, args.parameter, _parse_values(args.values), out_dir=args.out)
    _emit([o.summary() for o in outcomes], args.format)
    failed = [o for o in outcomes if o.error is not None]
    if failed:
        for o in failed:
            print(f"error: scenario {o.spec.name!r}: {o.error}", file=sys.stderr)
        return 3
    if args.strict and any(not o.result.converged for o in outcomes):
        print("error: at least one sweep scenario did not converge", file=sys.stderr)
        return 2
    return 0


def _cmd_catalog(args) -> int:
    records = []
    for name, spec in builtin_scenarios().items():
        records.append(
            {
                "scenario": name,
                "beta": spec.params.beta,
                "n_total": spec.params.n_total,
                "eps1": spec.params.eps1,
                "eps2": spec.params.eps2,
                "w1": spec.weights.w1,
                "w2": spec.weights.w2,
                "cost_kind": spec.cost_kind.value,
                "u1_enabled": spec.u1_enabled,
                "u2_enabled": spec.u2_enabled,
            }
        )
    _emit(records, args.format)
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "solve": _cmd_solve,
    "r0": _cmd_r0,
    "sensitivity": _cmd_sensitivity,
    "sweep": _cmd_sweep,
    "catalog": _cmd_catalog,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help path
        code = exc.code
        return code if isinstance(code, int) else 0
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DivergenceError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())
