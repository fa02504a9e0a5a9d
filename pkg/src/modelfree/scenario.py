"""Scenario files: declarative descriptions of one closed-loop experiment.

A scenario is flat ``key = value`` text (``#`` starts a comment).  Values are
Python literals where they need to be (numbers, nested lists); bare words are
read as strings.  Unknown keys are configuration errors, so typos fail loudly
instead of silently running defaults.
"""

from __future__ import annotations

import ast
import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .controllers import BroidaModel
from .plants import ParameterSchedule, TransferFunction

__all__ = [
    "ConfigError",
    "ReferenceTrajectory",
    "reference_at",
    "PlantConfig",
    "ControllerConfig",
    "Scenario",
    "parse_scenario_text",
    "load_scenario",
    "scenario_hash",
]


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


# ----------------------------------------------------------------- reference


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Reference profile y*(t) with a declared slope bound.

    Kinds ``ramp``, ``hold-ramp-hold`` and ``piecewise`` interpret the
    breakpoints as nodes of a piecewise-linear trajectory (held flat outside
    the breakpoint range).  Kind ``step`` interprets them as levels switched
    instantaneously; running such a reference realizes every level change as
    a ramp at ``max_slope``, and validation flags the raw declaration because
    its slope is unbounded.
    """

    kind: str
    breakpoints: tuple[tuple[float, float], ...]
    max_slope: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in ("step", "ramp", "hold-ramp-hold", "piecewise"):
            raise ConfigError(f"unknown reference kind {self.kind!r}")
        if not self.breakpoints:
            raise ConfigError("reference needs at least one breakpoint")
        times = [t for t, _ in self.breakpoints]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("reference breakpoint times must be non-decreasing")
        if self.max_slope <= 0.0:
            raise ConfigError("reference max_slope must be positive")


def realized_nodes(r: ReferenceTrajectory) -> tuple[tuple[float, float], ...]:
    """Piecewise-linear nodes actually evaluated by the harness."""
    if r.kind != "step":
        return r.breakpoints
    nodes = [r.breakpoints[0]]
    for t, v in r.breakpoints[1:]:
        prev_v = nodes[-1][1]
        if v == prev_v:
            continue
        nodes.append((t, prev_v))
        if math.isfinite(r.max_slope):
            nodes.append((t + abs(v - prev_v) / r.max_slope, v))
        else:
            nodes.append((t, v))  # unbounded slope: kept as a jump
    return tuple(nodes)


def reference_at(r: ReferenceTrajectory, t: float) -> tuple[float, float]:
    """(value, right slope) of the realized trajectory at time ``t``."""
    nodes = realized_nodes(r)
    if t <= nodes[0][0]:
        if t == nodes[0][0] and len(nodes) > 1 and nodes[1][0] > nodes[0][0]:
            t1, v1 = nodes[0]
            t2, v2 = nodes[1]
            return v1, (v2 - v1) / (t2 - t1)
        return nodes[0][1], 0.0
    if t >= nodes[-1][0]:
        return nodes[-1][1], 0.0
    for (t1, v1), (t2, v2) in zip(nodes, nodes[1:]):
        if t1 <= t < t2:
            slope = (v2 - v1) / (t2 - t1)
            return v1 + slope * (t - t1), slope
    return nodes[-1][1], 0.0


def max_realized_slope(r: ReferenceTrajectory) -> float:
    """Largest |slope| over the realized nodes; inf on coincident times."""
    worst = 0.0
    nodes = realized_nodes(r)
    for (t1, v1), (t2, v2) in zip(nodes, nodes[1:]):
        if t2 == t1:
            if v2 != v1:
                return math.inf
            continue
        worst = max(worst, abs((v2 - v1) / (t2 - t1)))
    return worst


# ------------------------------------------------------------------- configs


@dataclass(frozen=True)
class PlantConfig:
    kind: str  # lti | buck
    # lti
    numerator: tuple[float, ...] = ()
    denominator: tuple[float, ...] = ()
    aged_numerator: tuple[float, ...] | None = None
    aged_denominator: tuple[float, ...] | None = None
    ageing_time: float | None = None
    # buck
    E: float = 20.0
    L: float = 1e-3
    C: float = 1e-5
    R_schedule: ParameterSchedule | None = None


@dataclass(frozen=True)
class ControllerConfig:
    kind: str  # pid | ipi | ipis
    broida: BroidaModel | None = None
    alpha0: float | None = None
    alpha_ramp: float = 0.0
    Kp: float = 0.0
    Ki: float = 0.0
    nu: int = 1
    K_alpha: float = 2.0
    sign: float = 1.0
    gamma_band: tuple[float, float] | None = None
    h_alpha: float | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class Scenario:
    plant: PlantConfig
    controller: ControllerConfig
    reference: ReferenceTrajectory
    h: float
    duration: float
    plant_substeps: int = 1
    window_samples: int = 50
    noise_seed: int = 1
    noise_amplitude: float = 0.0
    actuator_min: float = -1e6
    actuator_max: float = 1e6


# ------------------------------------------------------------------- parsing

_KEYS = {
    "plant.kind",
    "plant.numerator",
    "plant.denominator",
    "plant.aged_numerator",
    "plant.aged_denominator",
    "plant.ageing_time",
    "plant.E",
    "plant.L",
    "plant.C",
    "plant.R_schedule",
    "plant.R_interpolation",
    "reference.kind",
    "reference.breakpoints",
    "reference.max_slope",
    "controller.kind",
    "controller.broida",
    "controller.alpha0",
    "controller.alpha_ramp",
    "controller.Kp",
    "controller.Ki",
    "controller.nu",
    "controller.K_alpha",
    "controller.sign",
    "controller.gamma_band",
    "controller.h_alpha",
    "controller.degenerate",
    "estimator.window_samples",
    "noise.seed",
    "noise.amplitude",
    "sim.h",
    "sim.duration",
    "sim.plant_substeps",
    "actuator.min",
    "actuator.max",
}


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw  # bare word (kind names etc.)


def _parse_lines(text: str) -> dict[str, object]:
    out: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown config key: {key}")
        if key in out:
            raise ConfigError(f"duplicate config key: {key}")
        out[key] = _parse_value(raw)
    return out


def _need(d: dict, key: str):
    if key not in d:
        raise ConfigError(f"missing required config key: {key}")
    return d[key]


def _as_float(d: dict, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(value)


def _as_pairs(key: str, value) -> tuple[tuple[float, float], ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key} must be a non-empty list of [t, value] pairs")
    pairs = []
    for item in value:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigError(f"{key} must be a list of [t, value] pairs")
        pairs.append((float(item[0]), float(item[1])))
    return tuple(pairs)


def parse_scenario_text(text: str) -> Scenario:
    d = _parse_lines(text)

    plant_kind = _need(d, "plant.kind")
    if plant_kind == "lti":
        num = tuple(float(c) for c in _need(d, "plant.numerator"))
        den = tuple(float(c) for c in _need(d, "plant.denominator"))
        TransferFunction(num, den)  # fail early on degenerate coefficients
        aged_num = d.get("plant.aged_numerator")
        aged_den = d.get("plant.aged_denominator")
        ageing_time = d.get("plant.ageing_time")
        if (aged_den is None) != (ageing_time is None):
            raise ConfigError(
                "plant.ageing_time and plant.aged_denominator must be set together"
            )
        for key in ("plant.E", "plant.L", "plant.C", "plant.R_schedule",
                    "plant.R_interpolation"):
            if key in d:
                raise ConfigError(f"{key} is only valid for plant.kind = buck")
        plant = PlantConfig(
            kind="lti",
            numerator=num,
            denominator=den,
            aged_numerator=tuple(float(c) for c in aged_num) if aged_num else None,
            aged_denominator=tuple(float(c) for c in aged_den) if aged_den else None,
            ageing_time=float(ageing_time) if ageing_time is not None else None,
        )
        default_act = (-1e6, 1e6)
    elif plant_kind == "buck":
        for key in ("plant.numerator", "plant.denominator", "plant.aged_numerator",
                    "plant.aged_denominator", "plant.ageing_time"):
            if key in d:
                raise ConfigError(f"{key} is only valid for plant.kind = lti")
        sched = ParameterSchedule(
            breakpoints=_as_pairs("plant.R_schedule", _need(d, "plant.R_schedule")),
            interpolation=d.get("plant.R_interpolation", "hold"),
        )
        plant = PlantConfig(
            kind="buck",
            E=_as_float(d, "plant.E", d.get("plant.E", 20.0)),
            L=_as_float(d, "plant.L", d.get("plant.L", 1e-3)),
            C=_as_float(d, "plant.C", d.get("plant.C", 1e-5)),
            R_schedule=sched,
        )
        default_act = (0.0, 1.0)
    else:
        raise ConfigError(f"plant.kind must be 'lti' or 'buck', got {plant_kind!r}")

    ctrl_kind = _need(d, "controller.kind")
    if ctrl_kind == "pid":
        triple = _need(d, "controller.broida")
        if not isinstance(triple, (list, tuple)) or len(triple) != 3:
            raise ConfigError("controller.broida must be a [K, T, tau] triple")
        controller = ControllerConfig(
            kind="pid",
            broida=BroidaModel(float(triple[0]), float(triple[1]), float(triple[2])),
        )
    elif ctrl_kind in ("ipi", "ipis"):
        alpha0 = _as_float(d, "controller.alpha0", _need(d, "controller.alpha0"))
        band = d.get("controller.gamma_band")
        if band is not None:
            if not isinstance(band, (list, tuple)) or len(band) != 2:
                raise ConfigError("controller.gamma_band must be [min, max]")
            band = (float(band[0]), float(band[1]))
        sign = d.get("controller.sign", 1)
        if sign not in (1, -1, 1.0, -1.0):
            raise ConfigError("controller.sign must be +1 or -1")
        nu = d.get("controller.nu", 1)
        if isinstance(nu, bool) or not isinstance(nu, int) or nu < 1:
            raise ConfigError("controller.nu must be a positive integer")
        controller = ControllerConfig(
            kind=ctrl_kind,
            alpha0=alpha0,
            alpha_ramp=_as_float(d, "controller.alpha_ramp",
                                 d.get("controller.alpha_ramp", 0.0)),
            Kp=_as_float(d, "controller.Kp", _need(d, "controller.Kp")),
            Ki=_as_float(d, "controller.Ki", d.get("controller.Ki", 0.0)),
            nu=nu,
            K_alpha=_as_float(d, "controller.K_alpha",
                              d.get("controller.K_alpha", 2.0)),
            sign=float(sign),
            gamma_band=band,
            h_alpha=(
                _as_float(d, "controller.h_alpha", d["controller.h_alpha"])
                if "controller.h_alpha" in d
                else None
            ),
            degenerate=bool(d.get("controller.degenerate", 0)),
        )
    else:
        raise ConfigError(
            f"controller.kind must be 'pid', 'ipi' or 'ipis', got {ctrl_kind!r}"
        )

    reference = ReferenceTrajectory(
        kind=_need(d, "reference.kind"),
        breakpoints=_as_pairs("reference.breakpoints",
                              _need(d, "reference.breakpoints")),
        max_slope=_as_float(d, "reference.max_slope",
                            d.get("reference.max_slope", math.inf)),
    )

    h = _as_float(d, "sim.h", _need(d, "sim.h"))
    duration = _as_float(d, "sim.duration", _need(d, "sim.duration"))
    if h <= 0.0 or duration <= 0.0:
        raise ConfigError("sim.h and sim.duration must be positive")
    substeps = d.get("sim.plant_substeps", 1)
    if isinstance(substeps, bool) or not isinstance(substeps, int) or substeps < 1:
        raise ConfigError("sim.plant_substeps must be a positive integer")
    window = d.get("estimator.window_samples", 50)
    if isinstance(window, bool) or not isinstance(window, int):
        raise ConfigError("estimator.window_samples must be an integer")
    seed = d.get("noise.seed", 1)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("noise.seed must be an integer")

    scenario = Scenario(
        plant=plant,
        controller=controller,
        reference=reference,
        h=h,
        duration=duration,
        plant_substeps=substeps,
        window_samples=window,
        noise_seed=seed,
        noise_amplitude=_as_float(d, "noise.amplitude",
                                  d.get("noise.amplitude", 0.0)),
        actuator_min=_as_float(d, "actuator.min",
                               d.get("actuator.min", default_act[0])),
        actuator_max=_as_float(d, "actuator.max",
                               d.get("actuator.max", default_act[1])),
    )
    _check_consistency(scenario)
    return scenario


def _check_consistency(s: Scenario) -> None:
    if s.noise_amplitude < 0.0:
        raise ConfigError("noise.amplitude must be non-negative")
    c = s.controller
    if c.kind in ("ipi", "ipis"):
        if c.alpha0 == 0.0:
            raise ConfigError("controller.alpha0 must be nonzero")
        a_end = c.alpha0 + c.alpha_ramp * s.duration
        if c.alpha0 * a_end <= 0.0:
            raise ConfigError("controller.alpha_ramp drives alpha through zero")
    if c.kind == "ipis" and c.alpha_ramp != 0.0:
        raise ConfigError("controller.alpha_ramp applies to the ipi law only "
                          "(ipis evolves alpha through its own recursion)")
    if c.kind == "ipis" and c.alpha0 is not None and c.alpha0 <= 0.0 and c.nu % 2 == 1:
        raise ConfigError("controller.alpha0 must be positive for ipis (gamma > 0)")
    if c.h_alpha is not None and c.h_alpha <= 0.0:
        raise ConfigError("controller.h_alpha must be positive")


def load_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        scenario = parse_scenario_text(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if seed_override is not None:
        scenario = replace(scenario, noise_seed=seed_override)
    return scenario


def canonical_text(s: Scenario) -> str:
    """Stable serialization used for the trace metadata hash."""
    pairs: list[tuple[str, object]] = [
        ("plant.kind", s.plant.kind),
        ("reference.kind", s.reference.kind),
        ("reference.breakpoints", [list(bp) for bp in s.reference.breakpoints]),
        ("reference.max_slope", s.reference.max_slope),
        ("controller.kind", s.controller.kind),
        ("sim.h", s.h),
        ("sim.duration", s.duration),
        ("sim.plant_substeps", s.plant_substeps),
        ("estimator.window_samples", s.window_samples),
        ("noise.seed", s.noise_seed),
        ("noise.amplitude", s.noise_amplitude),
        ("actuator.min", s.actuator_min),
        ("actuator.max", s.actuator_max),
    ]
    if s.plant.kind == "lti":
        pairs += [
            ("plant.numerator", list(s.plant.numerator)),
            ("plant.denominator", list(s.plant.denominator)),
            ("plant.aged_numerator",
             list(s.plant.aged_numerator) if s.plant.aged_numerator else None),
            ("plant.aged_denominator",
             list(s.plant.aged_denominator) if s.plant.aged_denominator else None),
            ("plant.ageing_time", s.plant.ageing_time),
        ]
    else:
        pairs += [
            ("plant.E", s.plant.E),
            ("plant.L", s.plant.L),
            ("plant.C", s.plant.C),
            ("plant.R_schedule",
             [list(bp) for bp in s.plant.R_schedule.breakpoints]),
            ("plant.R_interpolation", s.plant.R_schedule.interpolation),
        ]
    c = s.controller
    if c.kind == "pid":
        pairs += [("controller.broida", [c.broida.K, c.broida.T, c.broida.tau])]
    else:
        pairs += [
            ("controller.alpha0", c.alpha0),
            ("controller.alpha_ramp", c.alpha_ramp),
            ("controller.Kp", c.Kp),
            ("controller.Ki", c.Ki),
            ("controller.nu", c.nu),
            ("controller.K_alpha", c.K_alpha),
            ("controller.sign", c.sign),
            ("controller.gamma_band",
             list(c.gamma_band) if c.gamma_band else None),
            ("controller.h_alpha", c.h_alpha),
            ("controller.degenerate", c.degenerate),
        ]
    return "\n".join(f"{k} = {v!r}" for k, v in sorted(pairs)) + "\n"


def scenario_hash(s: Scenario) -> str:
    return hashlib.sha256(canonical_text(s).encode("utf-8")).hexdigest()
