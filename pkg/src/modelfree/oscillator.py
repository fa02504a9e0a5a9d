"""Mass-spring integrator comparison: why the gamma recursion keeps its shape.

The gamma update of the i-PIS law is a symplectic-Euler-type map, so this
module demonstrates on the plain oscillator x'' = -(k/m) x what that buys:
symplectic Euler keeps the energy 0.5*m*v^2 + 0.5*k*x^2 bounded, explicit
Euler inflates it every step, RK4 drifts only at its truncation order.

The quadratic form 0.5*m*v^2 + 0.5*k*x^2 is sometimes written down as this
system's Lagrangian; with the plus sign it is actually the energy (the
Lagrangian carries a minus).  The demo deliberately integrates the standard
dynamics and monitors the energy.  Damping defaults to zero, where
conservation is the meaningful diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "OscillatorParams",
    "OscillatorState",
    "oscillator_energy",
    "symplectic_euler_step",
    "explicit_euler_step",
    "rk4_oscillator_step",
    "run_energy_demo",
    "METHODS",
]

METHODS = ("symplectic", "explicit", "rk4")


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    k: float = 1.0
    damping: float = 0.0

    def __post_init__(self) -> None:
        if self.m <= 0.0 or self.k <= 0.0:
            raise ValueError("mass and spring constant must be positive")
        if self.damping < 0.0:
            raise ValueError("damping must be non-negative")


@dataclass(frozen=True)
class OscillatorState:
    x: float
    v: float


def oscillator_energy(s: OscillatorState, p: OscillatorParams) -> float:
    return 0.5 * p.m * s.v * s.v + 0.5 * p.k * s.x * s.x


def _accel(p: OscillatorParams, x: float, v: float) -> float:
    return -(p.k / p.m) * x - (p.damping / p.m) * v


def symplectic_euler_step(
    s: OscillatorState, p: OscillatorParams, h: float
) -> OscillatorState:
    """Velocity first, then position with the updated velocity."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    v_new = s.v + _accel(p, s.x, s.v) * h
    x_new = s.x + v_new * h
    return OscillatorState(x_new, v_new)


def explicit_euler_step(
    s: OscillatorState, p: OscillatorParams, h: float
) -> OscillatorState:
    """Both updates from the old state."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    x_new = s.x + s.v * h
    v_new = s.v + _accel(p, s.x, s.v) * h
    return OscillatorState(x_new, v_new)


def rk4_oscillator_step(
    s: OscillatorState, p: OscillatorParams, h: float
) -> OscillatorState:
    if h <= 0.0:
        raise ValueError("step size must be positive")
    x, v = s.x, s.v
    kx1 = v
    kv1 = _accel(p, x, v)
    kx2 = v + 0.5 * h * kv1
    kv2 = _accel(p, x + 0.5 * h * kx1, v + 0.5 * h * kv1)
    kx3 = v + 0.5 * h * kv2
    kv3 = _accel(p, x + 0.5 * h * kx2, v + 0.5 * h * kv2)
    kx4 = v + h * kv3
    kv4 = _accel(p, x + h * kx3, v + h * kv3)
    return OscillatorState(
        x + h * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4) / 6.0,
        v + h * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4) / 6.0,
    )


_STEPPERS = {
    "symplectic": symplectic_euler_step,
    "explicit": explicit_euler_step,
    "rk4": rk4_oscillator_step,
}


def run_energy_demo(
    method: str,
    p: OscillatorParams,
    s0: OscillatorState,
    h: float,
    steps: int,
) -> list[tuple[int, float, float, float, float]]:
    """Rows of (step, t, x, v, energy) for one integrator."""
    stepper = _STEPPERS[method]
    rows = [(0, 0.0, s0.x, s0.v, oscillator_energy(s0, p))]
    s = s0
    for n in range(1, steps + 1):
        s = stepper(s, p, h)
        rows.append((n, n * h, s.x, s.v, oscillator_energy(s, p)))
    return rows
