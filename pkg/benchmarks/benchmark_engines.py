#!/usr/bin/env python3
"""Benchmark the compiled closed-loop kernel against the pure-Python fallback.

For each preset the scenario is compiled to engine arguments once (by letting
the harness run and capturing the call), then each backend's run_loop is timed
on identical inputs.  Traces are checked for bit-identity while at it.

Usage: python benchmarks/benchmark_engines.py [--repeats N]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np  # noqa: E402

import modelfree.engine as engine_mod  # noqa: E402
from modelfree.cli import preset_path  # noqa: E402
from modelfree.engine import loop_py  # noqa: E402
from modelfree.harness import run_closed_loop  # noqa: E402
from modelfree.scenario import load_scenario  # noqa: E402

PRESET_FILES = [
    "lti-pid.scn",
    "lti-ipi-ageing.scn",
    "buck-ipi.scn",
    "buck-ipis-load.scn",
]


def capture_engine_args(scenario):
    captured = {}
    saved = engine_mod.run_loop

    def spy(*args):
        captured["args"] = args
        return saved(*args)

    engine_mod.run_loop = spy
    try:
        run_closed_loop(scenario)
    finally:
        engine_mod.run_loop = saved
    return captured["args"]


def best_time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        status = fn(*args)
        best = min(best, time.perf_counter() - t0)
        assert status == -1
    return best


def outputs_of(args):
    return tuple(np.array(a) for a in args[-8:])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    opts = parser.parse_args()

    try:
        from modelfree.engine import _loop_cy
    except ImportError:
        print("compiled engine not built; run `python setup.py build_ext --inplace`")
        return 1

    print(f"{'preset':<22} {'steps':>7} {'python':>10} {'compiled':>10} "
          f"{'speedup':>8}  identical")
    for name in PRESET_FILES:
        scenario = load_scenario(preset_path(name))
        args = capture_engine_args(scenario)
        n_steps = args[0]

        t_py = best_time(loop_py.run_loop, args, opts.repeats)
        out_py = outputs_of(args)
        t_cy = best_time(_loop_cy.run_loop, args, opts.repeats)
        out_cy = outputs_of(args)

        same = all(np.array_equal(a, b) for a, b in zip(out_py, out_cy))
        print(f"{name:<22} {n_steps:>7} {t_py * 1e3:>8.1f}ms {t_cy * 1e3:>8.1f}ms "
              f"{t_py / t_cy:>7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
