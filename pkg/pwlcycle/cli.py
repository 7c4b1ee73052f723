"""Command line front end.

    pwlcycle analyze --config system.json
    pwlcycle halfmap --config system.json --side right --grid 0:2:21
    pwlcycle trajectory --config system.json --start 0,1 --tspan 20 --points 400
    pwlcycle sweep --config sweep.json --seed 42 --out verdicts.csv --workers 4

Exit codes: 0 success, 1 invalid input, 2 non-sewing system, 3 numerical
failure.
"""

import argparse
import csv
import importlib
import json
import logging
import math
import sys
from dataclasses import dataclass

from pwlcycle import __version__, cycles, hooks
from pwlcycle.canonical import CanonicalParams, RawSystem, SewingVerdict, check_sewing, reduce_to_lienard
from pwlcycle.exceptions import NotSewing, PwlcycleError, ValidationError, log_error, throw
from pwlcycle.settings import Tolerances, get_tolerances

logger = logging.getLogger(__name__)

_CONFIG_KEYS = {"raw", "canonical", "tolerances", "sweep"}


@dataclass(frozen=True)
class Config:
    params: CanonicalParams | None
    sewing: SewingVerdict | None
    tolerances: Tolerances
    sweep: dict | None = None


def load_config(path, need_system=True):
    """Read and validate a JSON config document.

    Exactly one of ``raw`` / ``canonical`` describes the system (optional
    when ``need_system`` is false). A raw system must pass the sewing check.
    """
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        throw("Config must be a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        throw(f"Unknown config key(s): {', '.join(unknown)}")

    tol = get_tolerances(data.get("tolerances"))
    sweep = data.get("sweep")
    if sweep is not None and not isinstance(sweep, dict):
        throw("'sweep' must be an object")

    given = [k for k in ("raw", "canonical") if k in data]
    if len(given) > 1:
        throw("Config needs exactly one of 'raw' or 'canonical', got both")
    if not given:
        if need_system:
            throw("Config needs exactly one of 'raw' or 'canonical'")
        return Config(None, None, tol, sweep)

    if given[0] == "canonical":
        return Config(CanonicalParams.from_mapping(data["canonical"]), None, tol, sweep)

    raw = RawSystem.from_mapping(data["raw"])
    verdict = check_sewing(raw, tol)
    logger.info("Sewing verdict: %s (%s)", verdict.status.value, verdict.detail)
    if not verdict.ok:
        raise NotSewing(f"System is not sewing: {verdict.detail}", verdict)
    return Config(reduce_to_lienard(raw, tol=tol), verdict, tol, sweep)


# -------------------------------------------------------------------
# Output helpers
# -------------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}" if math.isfinite(value) else ""
    return str(value)


def write_csv(stream, columns, data, comment=None):
    fieldnames = [c["fieldname"] for c in columns]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in data:
        writer.writerow([_cell(row.get(name)) for name in fieldnames])
    if comment:
        stream.write(f"# {comment}\n")


def _emit_csv(out, columns, data, comment=None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_csv(f, columns, data, comment)
    else:
        write_csv(sys.stdout, columns, data, comment)


def _run_report(name, filters):
    return get_attr(hooks.reports[name])(filters)


def get_attr(path):
    """Resolve a dotted ``module.attribute`` path."""
    module, _, attr = path.rpartition(".")
    return getattr(importlib.import_module(module), attr)


# -------------------------------------------------------------------
# Argument parsing
# -------------------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _parse_grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or n < 0:
        raise argparse.ArgumentTypeError(f"grid needs finite ends and n >= 0, got {text!r}")
    return lo, hi, n


def _parse_point(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"start must be x,y, got {text!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise argparse.ArgumentTypeError(f"start must be finite, got {text!r}")
    return x, y


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser():
    parser = _ArgumentParser(prog="pwlcycle", description="Limit cycles of planar piecewise linear sewing systems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("analyze", help="full analysis report as JSON")
    p.add_argument("--config", required=True)

    p = sub.add_parser("halfmap", help="half-map table as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--grid", type=_parse_grid, required=True, help="lo:hi:n")
    p.add_argument("--out")

    p = sub.add_parser("trajectory", help="sampled trajectory as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--start", type=_parse_point, required=True, help="x,y")
    p.add_argument("--tspan", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="randomized property sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="per-sample CSV")
    p.add_argument("--workers", type=_positive_int, default=1)
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


# -------------------------------------------------------------------
# Commands
# -------------------------------------------------------------------


def cmd_analyze(args):
    config = load_config(args.config)
    report = cycles.analyze(config.params, sewing=config.sewing, tol=config.tolerances)
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True, allow_nan=False))
    return 0


def cmd_halfmap(args):
    config = load_config(args.config)
    columns, data, message = _run_report(
        "halfmap",
        {"params": config.params, "side": args.side, "grid": args.grid, "tol": config.tolerances},
    )
    _emit_csv(args.out, columns, data, message)
    return 0


def cmd_trajectory(args):
    config = load_config(args.config)
    if not math.isfinite(args.tspan):
        throw(f"--tspan must be finite, got {args.tspan!r}")
    columns, data = _run_report(
        "trajectory",
        {
            "params": config.params,
            "start": args.start,
            "t_span": args.tspan,
            "points": args.points,
            "tol": config.tolerances,
        },
    )
    _emit_csv(args.out, columns, data)
    return 0


def cmd_sweep(args):
    config = load_config(args.config, need_system=False)
    if config.sweep is None:
        throw("Config needs a 'sweep' block")
    unknown = sorted(set(config.sweep) - {"count", "seed", "ranges"})
    if unknown:
        throw(f"Unknown sweep field(s): {', '.join(unknown)}")
    seed = args.seed if args.seed is not None else config.sweep.get("seed")

    columns, data, summary = _run_report(
        "sweep",
        {
            "count": config.sweep.get("count", 0),
            "seed": seed,
            "ranges": config.sweep.get("ranges"),
            "tol": config.tolerances,
            "workers": args.workers,
        },
    )
    if args.out:
        _emit_csv(args.out, columns, data)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        return get_attr(hooks.commands[args.command])(args)
    except PwlcycleError as e:
        print(f"pwlcycle: {e}", file=sys.stderr)
        return e.exit_code
    except json.JSONDecodeError as e:
        print(f"pwlcycle: config is not valid JSON: {e}", file=sys.stderr)
        return ValidationError.exit_code
    except OSError as e:
        print(f"pwlcycle: {e}", file=sys.stderr)
        return ValidationError.exit_code
    except Exception as e:
        log_error("pwlcycle command failed")
        print(f"pwlcycle: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return PwlcycleError.exit_code


if __name__ == "__main__":
    sys.exit(main())
