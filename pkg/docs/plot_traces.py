#!/usr/bin/env python3
"""Plot per-iteration traces emitted by ``bench run``.

Usage: python docs/plot_traces.py <output-dir> [<figure.png>]

Reads every ``*_trace.csv`` sidecar in the directory and draws error (or
objective, when no ground-truth error was recorded) against iteration on a
log scale. CSV is the contract; this script is a convenience, not part of
the library.
"""

import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    its = [int(r["iteration"]) for r in rows]
    errs = [float(r["error"]) for r in rows]
    objs = [float(r["objective"]) for r in rows]
    if all(math.isnan(e) for e in errs):
        return its, objs, "objective"
    return its, errs, "error"


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out_dir = Path(sys.argv[1])
    target = sys.argv[2] if len(sys.argv) > 2 else out_dir / "traces.png"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    label_kind = "error"
    for path in sorted(out_dir.glob("*_trace.csv")):
        its, vals, label_kind = load_trace(path)
        vals = [max(v, 1e-16) for v in vals]
        ax.semilogy(its, vals, label=path.stem.replace("_trace", ""))
    ax.set_xlabel("iteration")
    ax.set_ylabel(label_kind)
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(target, dpi=140)
    print(target)


if __name__ == "__main__":
    main()
