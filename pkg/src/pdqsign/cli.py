"""Command line entry point: ``pdqsign test`` and ``pdqsign simulate``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .errors import InputError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="pdqsign", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run the PDQ test on two CSV samples")
    t.add_argument("--x1", required=True, help="CSV of sample 1 (rows = observations)")
    t.add_argument("--x2", required=True, help="CSV of sample 2")
    t.add_argument("--alpha", type=float, default=0.5, help="pairwise quantile level")
    t.add_argument("--B", type=int, default=200, help="bootstrap resamples")
    t.add_argument("--level", type=float, default=0.05, help="nominal size")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", help="write the JSON report here (default: stdout)")

    s = sub.add_parser("simulate", help="run a Monte Carlo size or power study")
    s.add_argument("--config", required=True, help="YAML key-value file of experiment settings")
    s.add_argument("--out-dir", default=".", help="directory for the CSV and JSON outputs")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return parser


def _cmd_test(args):
    if not 0 < args.alpha < 1:
        raise InputError("--alpha must lie in (0, 1)")
    if args.B < 19:
        raise InputError("--B must be >= 19")
    if not 0 < args.level <= 1:
        raise InputError("--level must lie in (0, 1]")
    report = harness.run_test(args.x1, args.x2, args.alpha, args.B, args.level, args.seed, args.out)
    if args.out is None:
        print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_simulate(args):
    configs = harness.load_config(args.config, seed=args.seed)
    report = harness.run_study(configs, workers=args.workers)
    paths = harness.write_report(report, args.out_dir)
    print(report.to_csv(), end="")
    print(f"wrote {paths['csv']} and {paths['json']} ({report.wall_clock:.1f}s)", file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "test":
            return _cmd_test(args)
        return _cmd_simulate(args)
    except InputError as exc:
        print(f"pdqsign: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"pdqsign: numerical failure in {exc.module}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
