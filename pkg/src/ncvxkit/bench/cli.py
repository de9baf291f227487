"""``bench``: generate instances, run solver suites, emit convergence tables.

Exit codes: 0 on success, 1 when a run fails, 2 on configuration errors.
Failures print a single JSON error report to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..exceptions import ConfigError, NcvxError
from .config import ExperimentConfig
from .emit import emit_traces
from .runner import default_jobs, list_solvers, run_suite

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _error_report(kind, message):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark harness for the non-convex solver suite.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, help="path to a YAML experiment file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=None,
                     help="worker processes (default: $NCVXKIT_JOBS or 1)")
    run.add_argument("--format", choices=["csv", "json"], default="csv",
                     help="main results format (default csv)")

    ls = sub.add_parser("list-solvers", help="list solvers for a problem")
    ls.add_argument("--problem", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-solvers":
        try:
            for name in list_solvers(args.problem.lower()):
                print(name)
        except ConfigError as exc:
            _error_report("config", exc)
            return EXIT_CONFIG_ERROR
        return EXIT_OK

    try:
        config = ExperimentConfig.from_file(args.config)
    except (ConfigError, OSError) as exc:
        _error_report("config", exc)
        return EXIT_CONFIG_ERROR

    try:
        jobs = args.jobs if args.jobs is not None else default_jobs()
        rows, traces = run_suite(config, jobs=jobs)
        main_path = emit_traces(rows, traces, format=args.format, path=args.out)
    except ConfigError as exc:
        _error_report("config", exc)
        return EXIT_CONFIG_ERROR
    except (NcvxError, OSError) as exc:
        _error_report("run", exc)
        return EXIT_RUN_FAILURE
    print(main_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
