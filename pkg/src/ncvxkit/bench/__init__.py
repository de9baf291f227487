"""Benchmark CLI and suite runner."""

from .config import ExperimentConfig, SolverSpec
from .emit import emit_traces, parse_results_csv
from .runner import PROBLEMS, ResultRow, list_solvers, run_suite

__all__ = [
    "ExperimentConfig",
    "SolverSpec",
    "emit_traces",
    "parse_results_csv",
    "PROBLEMS",
    "ResultRow",
    "list_solvers",
    "run_suite",
]
