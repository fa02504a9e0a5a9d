"""Command-line front end: run scenarios, presets, comparisons, energy demo.

Exit codes: 0 ok, 1 usage/config error, 2 validation violations, 3 divergence.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .harness import (
    DivergenceError,
    RunMetrics,
    ScenarioViolationsError,
    metrics_to_text,
    run_closed_loop,
    validate_scenario,
)
from .oscillator import METHODS, OscillatorParams, OscillatorState, run_energy_demo
from .scenario import ConfigError, load_scenario

# preset name -> (mode, scenario file names)
PRESETS: dict[str, tuple[str, tuple[str, ...]]] = {
    "lti-pid": ("run", ("lti-pid.scn",)),
    "lti-ipi": ("run", ("lti-ipi.scn",)),
    "lti-ageing": ("compare", ("lti-ipi-ageing.scn", "lti-pid-ageing.scn")),
    "alpha-ramp": ("compare", ("buck-alpha-ramp.scn", "buck-alpha-const.scn")),
    "buck-ipi": ("run", ("buck-ipi.scn",)),
    "buck-ipis": ("compare", ("buck-ipis.scn", "buck-ipi.scn")),
    "buck-ipis-load": ("run", ("buck-ipis-load.scn",)),
    "energy-demo": ("energy", ()),
}

_METRIC_FIELDS = (
    "iae",
    "steady_state_error",
    "overshoot",
    "settled",
    "settling_time",
    "gamma_clamp_count",
    "alpha_final_window_mean",
    "alpha_final_window_std",
)


def preset_path(name: str) -> Path:
    """Filesystem path of a committed preset scenario file."""
    return Path(str(resources.files("modelfree") / "presets" / name))


def _fmt_metric(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def _write(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text, encoding="utf-8")


def cmd_run(scenario_path: str, out_dir: Path, force: bool = False,
            seed: int | None = None) -> int:
    try:
        scenario = load_scenario(scenario_path, seed_override=seed)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        trace, metrics = run_closed_loop(scenario, force=force)
    except ScenarioViolationsError as exc:
        for v in exc.violations:
            print(f"violation {v}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _write(out_dir, "trace.csv", trace.to_csv())
    _write(out_dir, "metrics.txt", metrics_to_text(metrics))
    return 0


def _compare_text(name_a: str, name_b: str, ma: RunMetrics, mb: RunMetrics) -> str:
    lines = [f"# compare: {name_a} vs {name_b}"]
    for f in _METRIC_FIELDS:
        lines.append(
            f"{f}\t{_fmt_metric(getattr(ma, f))}\t{_fmt_metric(getattr(mb, f))}"
        )
    if mb.iae != 0.0:
        lines.append(f"iae_ratio = {ma.iae / mb.iae:.17g}")
    else:
        lines.append("iae_ratio = none")
    return "\n".join(lines) + "\n"


def cmd_compare(path_a: str, path_b: str, out_dir: Path, force: bool = False,
                seed: int | None = None) -> int:
    try:
        sa = load_scenario(path_a, seed_override=seed)
        sb = load_scenario(path_b, seed_override=seed)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if sa.h != sb.h or sa.duration != sb.duration:
        print("error: scenarios have different simulation grids", file=sys.stderr)
        return 1
    results = []
    for path, s in ((path_a, sa), (path_b, sb)):
        try:
            results.append(run_closed_loop(s, force=force))
        except ScenarioViolationsError as exc:
            for v in exc.violations:
                print(f"violation in {path}: {v}", file=sys.stderr)
            return 2
        except DivergenceError as exc:
            print(f"error in {path}: {exc}", file=sys.stderr)
            return 3
    (ta, ma), (tb, mb) = results
    _write(out_dir, "trace_a.csv", ta.to_csv())
    _write(out_dir, "trace_b.csv", tb.to_csv())
    _write(out_dir, "compare.txt",
           _compare_text(Path(path_a).name, Path(path_b).name, ma, mb))
    return 0


def cmd_energy_demo(out_dir: Path, h: float = 0.01, steps: int = 10000,
                    m: float = 1.0, k: float = 1.0, method: str = "all") -> int:
    if method != "all" and method not in METHODS:
        print(f"error: unknown method {method!r}; choose from "
              f"{', '.join(METHODS)} or all", file=sys.stderr)
        return 1
    if h <= 0.0 or steps < 1 or m <= 0.0 or k <= 0.0:
        print("error: h, steps, m, k must be positive", file=sys.stderr)
        return 1
    params = OscillatorParams(m=m, k=k)
    s0 = OscillatorState(x=1.0, v=0.0)
    methods = METHODS if method == "all" else (method,)
    lines = ["step,t,x,v,energy,method"]
    for name in methods:
        for step, t, x, v, energy in run_energy_demo(name, params, s0, h, steps):
            lines.append(
                f"{step},{t:.17g},{x:.17g},{v:.17g},{energy:.17g},{name}"
            )
    _write(out_dir, "energy.csv", "\n".join(lines) + "\n")
    return 0


def cmd_preset(name: str, out_dir: Path, force: bool = False,
               seed: int | None = None) -> int:
    if name not in PRESETS:
        print(f"error: unknown preset {name!r}; valid presets: "
              f"{', '.join(sorted(PRESETS))}", file=sys.stderr)
        return 1
    mode, files = PRESETS[name]
    if mode == "run":
        return cmd_run(str(preset_path(files[0])), out_dir, force, seed)
    if mode == "compare":
        return cmd_compare(str(preset_path(files[0])), str(preset_path(files[1])),
                           out_dir, force, seed)
    return cmd_energy_demo(out_dir)


def cmd_validate(scenario_path: str) -> int:
    try:
        scenario = load_scenario(scenario_path)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    violations = validate_scenario(scenario)
    for v in violations:
        print(f"violation {v}")
    if violations:
        return 2
    print("ok")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelfree",
        description="Closed-loop simulation of model-free i-PI / i-PIS control",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--force", action="store_true",
                       help="run despite validation violations")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario noise seed")

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    add_common(p_run)

    p_cmp = sub.add_parser("compare", help="run two scenarios side by side")
    p_cmp.add_argument("scenario_a")
    p_cmp.add_argument("scenario_b")
    add_common(p_cmp)

    p_pre = sub.add_parser("preset", help="run a committed preset")
    p_pre.add_argument("name")
    add_common(p_pre)

    p_en = sub.add_parser("energy-demo",
                          help="oscillator energy comparison of integrators")
    p_en.add_argument("--out", default="out")
    p_en.add_argument("--h", type=float, default=0.01)
    p_en.add_argument("--steps", type=int, default=10000)
    p_en.add_argument("--m", type=float, default=1.0)
    p_en.add_argument("--k", type=float, default=1.0)
    p_en.add_argument("--method", default="all",
                      choices=list(METHODS) + ["all"])

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.scenario, Path(args.out), args.force, args.seed)
    if args.command == "compare":
        return cmd_compare(args.scenario_a, args.scenario_b, Path(args.out),
                           args.force, args.seed)
    if args.command == "preset":
        return cmd_preset(args.name, Path(args.out), args.force, args.seed)
    if args.command == "energy-demo":
        return cmd_energy_demo(Path(args.out), args.h, args.steps, args.m,
                               args.k, args.method)
    return cmd_validate(args.scenario)


if __name__ == "__main__":
    sys.exit(main())
