"""Command-line entry point: ``twomode figure|verify|schedule``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (every field optional)")
    common.add_argument("--out", help="output file; stdout when omitted")
    common.add_argument("--grid-points", type=int, help="number of tau grid points")
    common.add_argument("--epsilon", type=float, help="truncation tail tolerance")

    parser = argparse.ArgumentParser(prog="twomode", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    fig = sub.add_parser("figure", parents=[common], help="write the curves of one figure as CSV")
    fig.add_argument("figure_id", choices=sorted(ex.FIGURES))
    fig.add_argument("--plot", metavar="PNG", help="also render the curves to this image file")
    ver = sub.add_parser("verify", parents=[common], help="closed forms vs the Fock-space oracle")
    ver.add_argument("--inject-fault", action="store_true", help="sign-flip one closed form (negative control)")
    sch = sub.add_parser("schedule", parents=[common], help="recurrence and exchange times as JSON")
    sch.add_argument("--terms", type=int, default=6, help="number of times to list (default 6)")
    sub.add_parser("default-config", help="print a config file with every default spelled out")
    return parser


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args):
    cfg = ex.load_config(args.config)
    return ex.with_overrides(cfg, args.grid_points, args.epsilon)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "default-config":
            _write(json.dumps(ex.default_config_dict(), indent=2) + "\n", None)
            return EXIT_OK
        cfg = _config(args)
        if args.command == "figure":
            data = ex.run_figure(args.figure_id, cfg)
            _write(data.to_csv(), args.out)
            if args.plot:
                from .plotting import render_figure

                render_figure(data, args.plot)
            return EXIT_OK
        if args.command == "schedule":
            if args.terms < 1:
                raise ConfigError("must be at least 1", "terms")
            _write(json.dumps(ex.emit_schedule(cfg, args.terms), indent=2) + "\n", args.out)
            return EXIT_OK
        report = ex.run_verify(cfg, inject_fault=args.inject_fault)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(report["summary"])
    return EXIT_OK if report["passed"] else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
