#!/usr/bin/env python3
"""Render trace.csv files produced by the CLI (developer tooling, optional).

Usage:
    python tools/plot_traces.py out/trace.csv [more.csv ...] [--save fig.png]

Plots output vs reference on top, input and online alpha below.
"""

import argparse
import csv
import sys
from pathlib import Path


def read_trace(path):
    cols = {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header = rows[0]
    for i, name in enumerate(header):
        cols[name] = [float(r[i]) for r in rows[1:]]
    return cols


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("traces", nargs="+")
    parser.add_argument("--save", default=None)
    opts = parser.parse_args()

    try:
        import matplotlib

        if opts.save:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; `pip install matplotlib` to plot")
        return 1

    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(9, 8))
    for path in opts.traces:
        tr = read_trace(path)
        label = Path(path).stem
        axes[0].plot(tr["t"], tr["y"], label=f"{label} y")
        axes[0].plot(tr["t"], tr["ystar"], "--", lw=0.8, label=f"{label} y*")
        axes[1].plot(tr["t"], tr["u"], label=f"{label} u")
        axes[2].plot(tr["t"], tr["alpha"], label=f"{label} alpha")
    axes[0].set_ylabel("output / reference")
    axes[1].set_ylabel("input")
    axes[2].set_ylabel("alpha")
    axes[2].set_xlabel("t [s]")
    for ax in axes:
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    if opts.save:
        fig.savefig(opts.save, dpi=130)
        print(f"saved {opts.save}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
