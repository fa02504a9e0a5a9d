"""Deterministic closed-loop executor: plant + estimator + controller -> Trace.

One run is strictly sequential (the control law is a recursion in u); the
heavy per-step loop lives in :mod:`modelfree.engine`.  This module compiles a
:class:`~modelfree.scenario.Scenario` into flat arrays, invokes the engine,
and turns the result into a Trace plus tracking metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine, __version__
from .controllers import ipow
from .estimation import estimator_weights
from .plants import TransferFunction, realize, schedule_value
from .scenario import (
    ConfigError,
    Scenario,
    max_realized_slope,
    reference_at,
    scenario_hash,
)

__all__ = [
    "Violation",
    "DivergenceError",
    "ScenarioViolationsError",
    "Trace",
    "RunMetrics",
    "validate_scenario",
    "run_closed_loop",
    "compute_metrics",
    "metrics_to_text",
    "TRACE_HEADER",
]

GRID_LIMIT = 10**8
TRACE_HEADER = "t,ystar,y,y_meas,y_hat,u,eps,alpha,gamma,clamped"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class DivergenceError(RuntimeError):
    """State or input left the admissible range; names the failing step."""

    def __init__(self, step: int, t: float):
        super().__init__(f"run diverged at step {step} (t = {t:.9g} s)")
        self.step = step
        self.t = t


class ScenarioViolationsError(ValueError):
    """Scenario failed validation and the run was not forced."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


def validate_scenario(s: Scenario) -> list[Violation]:
    """Machine-readable pre-run checks; an empty list means runnable."""
    out: list[Violation] = []

    if s.reference.kind == "step":
        out.append(
            Violation(
                "LIPSCHITZ_REFERENCE",
                "step reference declares an unbounded slope (it would be "
                "realized as a max_slope-limited ramp; declare the ramp "
                "explicitly or run with --force)",
            )
        )
    else:
        worst = max_realized_slope(s.reference)
        if not math.isfinite(worst):
            out.append(
                Violation(
                    "LIPSCHITZ_REFERENCE",
                    "reference contains an instantaneous jump",
                )
            )
        elif worst > s.reference.max_slope * (1.0 + 1e-9):
            out.append(
                Violation(
                    "LIPSCHITZ_REFERENCE",
                    f"reference slope {worst:.6g} exceeds declared "
                    f"max_slope {s.reference.max_slope:.6g}",
                )
            )

    sched = s.plant.R_schedule
    if sched is not None and sched.interpolation == "ramp":
        if not math.isfinite(sched.max_abs_slope):
            out.append(
                Violation("SCHEDULE_SLOPE", "load schedule slope is unbounded")
            )

    if s.window_samples < 3:
        out.append(
            Violation(
                "ESTIMATOR_WINDOW",
                f"estimator window of {s.window_samples} samples cannot "
                "support the integral estimators (need >= 3)",
            )
        )

    if not s.actuator_min < s.actuator_max:
        out.append(Violation("ACTUATOR_BAND", "actuator band is empty"))

    if s.duration / s.h > GRID_LIMIT:
        out.append(
            Violation(
                "GRID_LIMIT",
                f"duration/h = {s.duration / s.h:.3g} exceeds the "
                f"desk-scale guard of {GRID_LIMIT:g} steps",
            )
        )
    return out


@dataclass
class Trace:
    """Uniform-grid record of one closed-loop run."""

    h: float
    t: np.ndarray
    ystar: np.ndarray
    y: np.ndarray
    y_meas: np.ndarray
    y_hat: np.ndarray
    u: np.ndarray
    eps: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    clamped: np.ndarray
    meta: dict[str, str]

    @property
    def n_records(self) -> int:
        return len(self.t)

    def to_csv(self) -> str:
        lines = [f"# {k} = {v}" for k, v in sorted(self.meta.items())]
        lines.append(TRACE_HEADER)
        cols = (self.t, self.ystar, self.y, self.y_meas, self.y_hat,
                self.u, self.eps, self.alpha, self.gamma)
        for i in range(self.n_records):
            row = ",".join(f"{col[i]:.17g}" for col in cols)
            lines.append(f"{row},{int(self.clamped[i])}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunMetrics:
    iae: float
    steady_state_error: float
    overshoot: float
    settled: bool
    settling_time: float | None
    gamma_clamp_count: int
    alpha_final_window_mean: float
    alpha_final_window_std: float


def run_closed_loop(s: Scenario, force: bool = False) -> tuple[Trace, RunMetrics]:
    """Execute one scenario.  Raises ScenarioViolationsError unless forced,
    DivergenceError if the guard fires."""
    violations = validate_scenario(s)
    if violations and not force:
        raise ScenarioViolationsError(violations)

    n = int(math.floor(s.duration / s.h + 1e-9))
    if n < 1:
        raise ConfigError("duration must cover at least one step")
    records = n + 1

    t_grid = np.arange(records, dtype=np.int64) * s.h
    ystar = np.empty(records)
    yslope = np.empty(records)
    for k in range(records):
        ystar[k], yslope[k] = reference_at(s.reference, float(t_grid[k]))

    rng = np.random.RandomState(s.noise_seed)
    noise = s.noise_amplitude * rng.standard_normal(records)

    # plant arrays
    if s.plant.kind == "lti":
        plant_kind = 0
        ss = realize(TransferFunction(s.plant.numerator, s.plant.denominator))
        A = np.array(ss.A, dtype=float)
        B = np.array(ss.B, dtype=float)
        C = np.array(ss.C, dtype=float)
        D = ss.D
        x0 = np.zeros(ss.order)
        if s.plant.ageing_time is not None:
            aged_num = s.plant.aged_numerator or s.plant.numerator
            aged = realize(TransferFunction(aged_num, s.plant.aged_denominator))
            if aged.order != ss.order:
                raise ConfigError("aged plant must preserve the state dimension")
            A_aged = np.array(aged.A, dtype=float)
            # first step whose start time falls at or past the switch
            age_step = int(math.ceil(s.plant.ageing_time / s.h - 1e-9))
        else:
            A_aged = A
            age_step = -1
        E = Lc = Cc = 1.0
        R_sched = np.empty(0)
        buck_i0 = buck_v0 = 0.0
    else:
        plant_kind = 1
        A = A_aged = np.zeros((1, 1))
        B = C = np.zeros(1)
        D = 0.0
        x0 = np.zeros(1)
        age_step = -1
        E, Lc, Cc = s.plant.E, s.plant.L, s.plant.C
        sched = s.plant.R_schedule
        R_sched = np.array(
            [schedule_value(sched, float(t_grid[k])) for k in range(n)]
        )
        if np.any(R_sched <= 0.0):
            raise ConfigError("scheduled load resistance must stay positive")
        buck_i0 = buck_v0 = 0.0

    # controller parameters
    c = s.controller
    Kp = Ki = Kd = 0.0
    alpha0 = alpha_ramp = 0.0
    nu = 1
    K_alpha = 2.0
    ff_sign = 1.0
    gamma0 = gamma_min = gamma_max = 1.0
    h_alpha = s.h
    degenerate = 0
    if c.kind == "pid":
        ctrl_kind = 0
        from .controllers import broida_gains

        g = broida_gains(c.broida)
        Kp, Ki, Kd = g.K_P, g.K_I, g.K_D
    elif c.kind == "ipi":
        ctrl_kind = 1
        Kp, Ki = c.Kp, c.Ki
        alpha0, alpha_ramp = c.alpha0, c.alpha_ramp
    else:
        ctrl_kind = 2
        Kp, Ki = c.Kp, c.Ki
        alpha0 = c.alpha0
        nu = c.nu
        K_alpha = c.K_alpha
        ff_sign = c.sign
        gamma0 = ipow(alpha0, nu)
        if gamma0 <= 0.0:
            raise ConfigError("gamma_0 = alpha_0^nu must be positive")
        if c.gamma_band is not None:
            gamma_min, gamma_max = c.gamma_band
        else:
            gamma_min, gamma_max = 0.1 * gamma0, 10.0 * gamma0
        if not (0.0 < gamma_min <= gamma0 <= gamma_max):
            raise ConfigError("gamma band must contain gamma_0 and stay positive")
        if c.h_alpha is not None:
            h_alpha = c.h_alpha
        degenerate = 1 if c.degenerate else 0

    dw, vw = estimator_weights(s.window_samples, s.h)

    out_y = np.empty(records)
    out_meas = np.empty(records)
    out_hat = np.empty(records)
    out_u = np.empty(records)
    out_eps = np.empty(records)
    out_alpha = np.empty(records)
    out_gamma = np.empty(records)
    out_flags = np.zeros(records, dtype=np.int32)

    status = engine.run_loop(
        n, s.h, s.plant_substeps,
        plant_kind,
        A, B, C, D, x0,
        A_aged, age_step,
        E, Lc, Cc, R_sched, buck_i0, buck_v0,
        ystar, yslope, noise,
        ctrl_kind,
        Kp, Ki, Kd,
        alpha0, alpha_ramp,
        nu, K_alpha, ff_sign,
        gamma0, gamma_min, gamma_max,
        h_alpha, degenerate,
        s.actuator_min, s.actuator_max,
        s.window_samples, np.array(dw), np.array(vw),
        out_y, out_meas, out_hat, out_u, out_eps, out_alpha, out_gamma,
        out_flags,
    )
    if status >= 0:
        raise DivergenceError(status, status * s.h)

    meta = {
        "scenario_hash": scenario_hash(s),
        "seed": str(s.noise_seed),
        "version": __version__,
    }
    if violations:
        meta["forced_violations"] = ";".join(v.code for v in violations)
    trace = Trace(
        h=s.h,
        t=t_grid,
        ystar=ystar,
        y=out_y,
        y_meas=out_meas,
        y_hat=out_hat,
        u=out_u,
        eps=out_eps,
        alpha=out_alpha,
        gamma=out_gamma,
        clamped=out_flags,
        meta=meta,
    )
    return trace, compute_metrics(trace)


def compute_metrics(tr: Trace, start: int = 0, stop: int | None = None) -> RunMetrics:
    """Tracking metrics over trace records [start, stop).

    The error integral uses the left-rectangle rule; the steady-state and
    alpha statistics use the final 10% of the window; settling is the first
    instant after which |eps| stays below 2% of the reference span.
    """
    if stop is None:
        stop = tr.n_records
    if stop - start < 1:
        raise ValueError("metrics need at least one record")
    eps = tr.eps[start:stop]
    ystar = tr.ystar[start:stop]
    y = tr.y[start:stop]
    alpha = tr.alpha[start:stop]
    n = len(eps)

    iae = float(np.sum(np.abs(eps[: n - 1])) * tr.h) if n > 1 else 0.0

    tail = max(1, n // 10)
    sse = float(np.mean(np.abs(eps[n - tail:])))

    span = float(np.max(ystar) - np.min(ystar))
    if span > 0.0:
        overshoot = max(0.0, float(np.max(y) - np.max(ystar)) / span)
        threshold = 0.02 * span
    else:
        overshoot = 0.0
        threshold = 0.0

    above = np.flatnonzero(np.abs(eps) > threshold)
    if len(above) == 0:
        settled = True
        settling_time: float | None = 0.0
    elif above[-1] == n - 1:
        settled = False
        settling_time = None
    else:
        settled = True
        settling_time = float(tr.t[start + int(above[-1]) + 1] - tr.t[start])

    clamp_count = int(np.count_nonzero(tr.clamped[start:stop] & 2))
    a_tail = alpha[n - tail:]
    return RunMetrics(
        iae=iae,
        steady_state_error=sse,
        overshoot=overshoot,
        settled=settled,
        settling_time=settling_time,
        gamma_clamp_count=clamp_count,
        alpha_final_window_mean=float(np.mean(a_tail)),
        alpha_final_window_std=float(np.std(a_tail)),
    )


def metrics_to_text(m: RunMetrics) -> str:
    lines = [
        f"iae = {m.iae:.17g}",
        f"steady_state_error = {m.steady_state_error:.17g}",
        f"overshoot = {m.overshoot:.17g}",
        f"settled = {1 if m.settled else 0}",
        f"settling_time = {'none' if m.settling_time is None else format(m.settling_time, '.17g')}",
        f"gamma_clamp_count = {m.gamma_clamp_count}",
        f"alpha_final_window_mean = {m.alpha_final_window_mean:.17g}",
        f"alpha_final_window_std = {m.alpha_final_window_std:.17g}",
    ]
    return "\n".join(lines) + "\n"
