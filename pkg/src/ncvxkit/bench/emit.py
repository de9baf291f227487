"""Result and trace serialization: CSV (the contract) and JSON."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..exceptions import InvalidInputError

RESULT_HEADER = [
    "problem", "solver", "seed", "n", "p", "s", "r", "k",
    "iterations", "final_error", "wall_seconds", "converged",
]
TRACE_HEADER = ["iteration", "objective", "error", "elapsed"]
RESULTS_BASENAME = "results"


def emit_traces(rows, traces, format="csv", path="."):
    """Write the result table plus one per-run trace sidecar.

    ``format`` is "csv" or "json" for the main table; sidecars named
    "<solver>_<seed>_trace.csv" are always CSV. Returns the main file path.
    """
    format = format.lower()
    if format not in ("csv", "json"):
        raise InvalidInputError(f"unknown format {format!r}")
    out_dir = Path(path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        main = out_dir / f"{RESULTS_BASENAME}.{format}"
        if format == "csv":
            _write_csv(main, rows)
        else:
            _write_json(main, rows)
        for (solver, seed), trace_rows in (traces or {}).items():
            side = out_dir / f"{solver}_{seed}_trace.csv"
            with open(side, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(TRACE_HEADER)
                for it, obj, err, elapsed in trace_rows:
                    w.writerow([it, repr(float(obj)), repr(float(err)),
                                repr(float(elapsed))])
    except OSError as exc:
        raise InvalidInputError(f"cannot write results under {out_dir}: {exc}") from exc
    return main


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_HEADER)
        for row in rows:
            rec = row.as_record()
            w.writerow([_cell(rec[key]) for key in RESULT_HEADER])


def _write_json(path, rows):
    payload = {"schema_version": 1, "rows": [row.as_record() for row in rows]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_results_csv(path):
    """Read a results CSV back into a list of record dicts (inverse of emit)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_HEADER:
            raise InvalidInputError(f"unexpected header in {path}")
        out = []
        for raw in reader:
            rec = {}
            for key in RESULT_HEADER:
                val = raw[key]
                if key in ("problem", "solver"):
                    rec[key] = val
                elif key == "converged":
                    rec[key] = val == "true"
                elif val == "":
                    rec[key] = None
                elif key in ("seed", "iterations"):
                    rec[key] = int(val)
                elif key in ("final_error", "wall_seconds"):
                    rec[key] = float(val)
                else:
                    rec[key] = _maybe_number(val)
            out.append(rec)
        return out


def _maybe_number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)
