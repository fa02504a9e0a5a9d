"""Continuous-time plant models advanced at a fixed step.

Generic SISO LTI plants are realized from transfer functions in controllable
canonical form; the dc/dc buck converter uses the averaged continuous-
conduction model.  Both are integrated with classical RK4 under a zero-order
hold on the input.  All arithmetic is plain scalar float so the fast engine
can reproduce it operation for operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RealizationError",
    "PoleAtOriginError",
    "TransferFunction",
    "StateSpacePlant",
    "BuckConverter",
    "ParameterSchedule",
    "NoiseSource",
    "realize",
    "dc_gain",
    "step_lti",
    "step_buck",
    "schedule_value",
    "noisy_measure",
]


class RealizationError(ValueError):
    """Transfer function cannot be realized (improper or degenerate)."""


class PoleAtOriginError(ZeroDivisionError):
    """dc gain undefined: the denominator vanishes at s = 0."""


def _strip(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    i = 0
    while i < len(coeffs) - 1 and coeffs[i] == 0.0:
        i += 1
    return coeffs[i:]


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function with descending-power real coefficients."""

    numerator: tuple[float, ...]
    denominator: tuple[float, ...]

    def __post_init__(self) -> None:
        num = _strip(tuple(float(c) for c in self.numerator))
        den = _strip(tuple(float(c) for c in self.denominator))
        if not den or den[0] == 0.0:
            raise RealizationError("denominator must have a nonzero leading coefficient")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def is_proper(self) -> bool:
        return len(self.numerator) <= len(self.denominator)


@dataclass
class StateSpacePlant:
    """Controllable canonical realization; ``state`` is mutated by step_lti."""

    A: tuple[tuple[float, ...], ...]
    B: tuple[float, ...]
    C: tuple[float, ...]
    D: float
    state: list[float]

    @property
    def order(self) -> int:
        return len(self.state)

    def output(self, u: float = 0.0) -> float:
        acc = 0.0
        for c, x in zip(self.C, self.state):
            acc += c * x
        return acc + self.D * u


def realize(tf: TransferFunction) -> StateSpacePlant:
    """Controllable canonical form with zero initial state."""
    if not tf.is_proper:
        raise RealizationError(
            f"improper transfer function: numerator degree {len(tf.numerator) - 1} "
            f"> denominator degree {len(tf.denominator) - 1}"
        )
    a0 = tf.denominator[0]
    den = [c / a0 for c in tf.denominator]  # monic
    num = [c / a0 for c in tf.numerator]
    n = len(den) - 1
    if n == 0:
        raise RealizationError("static gains have no state to realize")
    num = [0.0] * (n + 1 - len(num)) + num
    d = num[0]
    # remainder after removing the direct feedthrough
    rem = [num[i] - d * den[i] for i in range(1, n + 1)]
    rows = []
    for i in range(n - 1):
        rows.append(tuple(1.0 if j == i + 1 else 0.0 for j in range(n)))
    rows.append(tuple(-den[n - j] for j in range(n)))
    c_row = tuple(rem[n - 1 - j] for j in range(n))
    return StateSpacePlant(
        A=tuple(rows),
        B=tuple(0.0 if i < n - 1 else 1.0 for i in range(n)),
        C=c_row,
        D=d,
        state=[0.0] * n,
    )


def dc_gain(tf: TransferFunction) -> float:
    """numerator(0) / denominator(0)."""
    den0 = tf.denominator[-1]
    if den0 == 0.0:
        raise PoleAtOriginError("denominator constant term is zero")
    return tf.numerator[-1] / den0


def _lti_deriv(
    A: tuple[tuple[float, ...], ...], B: tuple[float, ...], x: list[float], u: float
) -> list[float]:
    out = []
    for i in range(len(x)):
        acc = 0.0
        row = A[i]
        for j in range(len(x)):
            acc += row[j] * x[j]
        out.append(acc + B[i] * u)
    return out


def step_lti(plant: StateSpacePlant, u: float, h: float) -> float:
    """One RK4 step under a zero-order-hold input; returns the new output."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    x = plant.state
    n = len(x)
    k1 = _lti_deriv(plant.A, plant.B, x, u)
    x2 = [x[i] + 0.5 * h * k1[i] for i in range(n)]
    k2 = _lti_deriv(plant.A, plant.B, x2, u)
    x3 = [x[i] + 0.5 * h * k2[i] for i in range(n)]
    k3 = _lti_deriv(plant.A, plant.B, x3, u)
    x4 = [x[i] + h * k3[i] for i in range(n)]
    k4 = _lti_deriv(plant.A, plant.B, x4, u)
    for i in range(n):
        x[i] = x[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
    return plant.output(u)


@dataclass
class BuckConverter:
    """Averaged (continuous-conduction) buck converter state and parameters."""

    E: float = 20.0
    L: float = 1e-3
    C: float = 1e-5
    inductor_current: float = 0.0
    capacitor_voltage: float = 0.0

    def __post_init__(self) -> None:
        if self.E <= 0.0 or self.L <= 0.0 or self.C <= 0.0:
            raise ValueError("buck parameters E, L, C must be positive")


def step_buck(plant: BuckConverter, duty: float, R_now: float, h: float) -> float:
    """One RK4 step with the load fixed at ``R_now``; returns the new voltage.

    The duty cycle is clamped into [0, 1] before use.
    """
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if R_now <= 0.0:
        raise ValueError("load resistance must be positive")
    d = duty
    if d < 0.0:
        d = 0.0
    elif d > 1.0:
        d = 1.0
    E, L, C = plant.E, plant.L, plant.C
    i0 = plant.inductor_current
    v0 = plant.capacitor_voltage

    di1 = (d * E - v0) / L
    dv1 = (i0 - v0 / R_now) / C
    i1 = i0 + 0.5 * h * di1
    v1 = v0 + 0.5 * h * dv1
    di2 = (d * E - v1) / L
    dv2 = (i1 - v1 / R_now) / C
    i2 = i0 + 0.5 * h * di2
    v2 = v0 + 0.5 * h * dv2
    di3 = (d * E - v2) / L
    dv3 = (i2 - v2 / R_now) / C
    i3 = i0 + h * di3
    v3 = v0 + h * dv3
    di4 = (d * E - v3) / L
    dv4 = (i3 - v3 / R_now) / C

    plant.inductor_current = i0 + h * (di1 + 2.0 * di2 + 2.0 * di3 + di4) / 6.0
    plant.capacitor_voltage = v0 + h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
    return plant.capacitor_voltage


@dataclass(frozen=True)
class ParameterSchedule:
    """Piecewise parameter profile: ``hold`` steps or ``ramp`` interpolation."""

    breakpoints: tuple[tuple[float, float], ...]
    interpolation: str = "hold"

    def __post_init__(self) -> None:
        if self.interpolation not in ("hold", "ramp"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        times = [t for t, _ in self.breakpoints]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("schedule times must be strictly increasing")

    @property
    def max_abs_slope(self) -> float:
        if self.interpolation != "ramp" or len(self.breakpoints) < 2:
            return 0.0
        worst = 0.0
        for (t1, v1), (t2, v2) in zip(self.breakpoints, self.breakpoints[1:]):
            if t2 == t1:
                if v2 != v1:
                    return float("inf")
                continue
            worst = max(worst, abs((v2 - v1) / (t2 - t1)))
        return worst


def schedule_value(s: ParameterSchedule, t: float) -> float:
    """Scheduled value at time ``t`` (clamped outside the breakpoint range)."""
    if not s.breakpoints:
        raise ValueError("schedule has no breakpoints")
    bps = s.breakpoints
    if t <= bps[0][0]:
        return bps[0][1]
    if t >= bps[-1][0]:
        return bps[-1][1]
    for (t1, v1), (t2, v2) in zip(bps, bps[1:]):
        if t1 <= t < t2:
            if s.interpolation == "hold":
                return v1
            return v1 + (v2 - v1) * (t - t1) / (t2 - t1)
    return bps[-1][1]


@dataclass
class NoiseSource:
    """Seeded additive white measurement noise; same seed, same stream."""

    seed: int
    amplitude: float
    _rng: np.random.RandomState = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = np.random.RandomState(self.seed)

    def stream(self, count: int) -> np.ndarray:
        """The next ``count`` amplitude-scaled draws (used by the harness)."""
        return self.amplitude * self._rng.standard_normal(count)


def noisy_measure(n: NoiseSource, y_true: float) -> float:
    return y_true + n.amplitude * float(n._rng.standard_normal())
