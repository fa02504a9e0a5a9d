"""The three control laws: Broida-tuned PID, discrete i-PI, and i-PIS.

The i-PI law advances the last input by the scaled mismatch between the
measured output derivative (one window behind) and the reference slope, plus
a classical PI corrector:

    u_k = u_{k-1} - (1/alpha) * (ydot_{k-1} - ystar_dot_k) + Kp*eps + Ki*int(eps)

The i-PIS law replaces the fixed 1/alpha by the tuning variable
gamma = alpha^nu, evolved by the second-order recursion

    gamma_{k+1} = -((h^nu / K_alpha) * eps_dot - 2) * gamma_k - gamma_{k-1}

(the stationarity condition of the tracking-cost integral, solved for
gamma_{k+1}), and adds the feedforward term sign * K_alpha * (dgamma/dt)^nu.
`el_residual` evaluates that stationarity condition on a gamma triple and
`alpha_criterion` integrates both sides of the underlying cost identity so a
run can be checked against it after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

__all__ = [
    "PidGains",
    "PidState",
    "BroidaModel",
    "IPiConfig",
    "IPiState",
    "IPisConfig",
    "IPisState",
    "ControlInputs",
    "CriterionIntegrals",
    "broida_gains",
    "pid_step",
    "ipi_step",
    "ipis_alpha_update",
    "ipis_step",
    "alpha_criterion",
    "el_residual",
    "ipow",
]


def ipow(base: float, exponent: int) -> float:
    """Integer power by repeated multiplication (deterministic, no libm pow)."""
    if exponent < 0:
        raise ValueError("exponent must be a non-negative integer")
    acc = 1.0
    for _ in range(exponent):
        acc *= base
    return acc


@dataclass(frozen=True)
class PidGains:
    K_P: float
    K_I: float
    K_D: float


@dataclass
class PidState:
    integral_of_error: float = 0.0
    previous_error: float = 0.0


@dataclass(frozen=True)
class BroidaModel:
    """First-order-plus-delay fit K e^{-tau s} / (T s + 1)."""

    K: float
    T: float
    tau: float

    def __post_init__(self) -> None:
        if self.K == 0.0 or self.T <= 0.0 or self.tau <= 0.0:
            raise ValueError("Broida model needs K != 0, T > 0, tau > 0")


def broida_gains(m: BroidaModel) -> PidGains:
    """Closed-form PID gains from the first-order-plus-delay fit."""
    kp = 100.0 * (0.4 * m.tau + m.T) / (120.0 * m.K * m.tau)
    ki = 1.0 / (1.33 * m.K * m.tau)
    kd = 0.35 * m.T / m.K
    return PidGains(kp, ki, kd)


def pid_step(
    state: PidState,
    gains: PidGains,
    eps: float,
    h: float,
    freeze_integral: bool = False,
) -> float:
    """Parallel-form PID with rectangle-rule integral and backward-difference
    derivative.  ``freeze_integral`` implements anti-windup (the harness sets
    it while the actuator is saturated)."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if not freeze_integral:
        state.integral_of_error += eps * h
    derivative = (eps - state.previous_error) / h
    state.previous_error = eps
    return gains.K_P * eps + gains.K_I * state.integral_of_error + gains.K_D * derivative


@dataclass(frozen=True)
class IPiConfig:
    """i-PI parameters.  ``alpha`` is the input-output scaling; ``n`` the
    derivative order of the local model (only 1 is supported)."""

    alpha: float
    K_P: float
    K_I: float = 0.0
    n: int = 1

    def __post_init__(self) -> None:
        if self.alpha == 0.0:
            raise ValueError("alpha must be nonzero")
        if self.n != 1:
            raise ValueError("only derivative order n = 1 is supported")


@dataclass
class IPiState:
    previous_u: float = 0.0
    corrector_integral: float = 0.0


@dataclass(frozen=True)
class ControlInputs:
    """Per-step controller inputs.  ``y_dot_prev`` and ``eps_dot`` are the
    delayed window estimates; ``ystar_dot`` is the analytic reference slope."""

    y_dot_prev: float
    ystar_dot: float
    eps: float
    eps_dot: float


def ipi_step(
    state: IPiState,
    cfg: IPiConfig,
    inp: ControlInputs,
    h: float,
    freeze_integral: bool = False,
) -> float:
    """One step of the discrete i-PI law; updates ``state`` in place."""
    # reciprocal computed once so a frozen gamma = 1/alpha reproduces this
    # product bit for bit (degeneration contract with ipis_step)
    inv_alpha = 1.0 / cfg.alpha
    if not freeze_integral:
        state.corrector_integral += inp.eps * h
    u = (
        state.previous_u
        - inv_alpha * (inp.y_dot_prev - inp.ystar_dot)
        + cfg.K_P * inp.eps
        + cfg.K_I * state.corrector_integral
    )
    state.previous_u = u
    return u


@dataclass(frozen=True)
class IPisConfig:
    """i-PIS parameters on top of an i-PI base.

    ``base.alpha`` is the initial condition alpha_0 (gamma_0 = alpha_0^nu).
    ``h`` is the controller step; ``h_alpha`` the step used in the gamma
    recursion (defaults to ``h``).  ``gamma_band`` clamps the recursion; when
    omitted it defaults to [0.1 * gamma_0, 10 * gamma_0].  ``degenerate``
    freezes gamma and drops the feedforward term so the law collapses onto
    i-PI exactly.
    """

    base: IPiConfig
    h: float
    nu: int = 1
    K_alpha: float = 2.0
    feedforward_sign: float = 1.0
    h_alpha: float | None = None
    gamma_band: tuple[float, float] | None = None
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.nu < 1:
            raise ValueError("nu must be a positive integer")
        if self.K_alpha == 0.0:
            raise ValueError("K_alpha must be nonzero")
        if self.h <= 0.0:
            raise ValueError("controller step must be positive")
        if self.feedforward_sign not in (1.0, -1.0):
            raise ValueError("feedforward sign must be +1 or -1")
        if self.h_alpha is None:
            object.__setattr__(self, "h_alpha", self.h)
        if self.gamma_band is None:
            g0 = self.gamma0
            object.__setattr__(self, "gamma_band", (0.1 * g0, 10.0 * g0))
        lo, hi = self.gamma_band
        if not (0.0 < lo <= hi):
            raise ValueError("gamma band must satisfy 0 < min <= max")

    @property
    def gamma0(self) -> float:
        g0 = ipow(self.base.alpha, self.nu)
        if g0 <= 0.0:
            raise ValueError("gamma_0 = alpha_0^nu must be positive")
        return g0


@dataclass
class IPisState:
    previous_u: float = 0.0
    gamma_k: float = 1.0
    gamma_km1: float = 1.0
    corrector_integral: float = 0.0
    previous_eps_dot: float = 0.0
    last_gamma_clamped: bool = False


def initial_ipis_state(cfg: IPisConfig) -> IPisState:
    """Stationary start: both gamma values at gamma_0."""
    g0 = cfg.gamma0
    return IPisState(gamma_k=g0, gamma_km1=g0)


def _gamma_next_raw(
    gamma_k: float, gamma_km1: float, eps_dot: float, cfg: IPisConfig
) -> float:
    q = (ipow(cfg.h_alpha, cfg.nu) / cfg.K_alpha) * eps_dot
    return -(q - 2.0) * gamma_k - gamma_km1


def ipis_alpha_update(
    gamma_k: float, gamma_km1: float, eps_dot: float, cfg: IPisConfig
) -> float:
    """Next gamma from the second-order recursion, clamped into the band."""
    raw = _gamma_next_raw(gamma_k, gamma_km1, eps_dot, cfg)
    lo, hi = cfg.gamma_band
    if raw < lo:
        return lo
    if raw > hi:
        return hi
    return raw


def ipis_step(
    state: IPisState,
    cfg: IPisConfig,
    inp: ControlInputs,
    freeze_integral: bool = False,
) -> float:
    """One step of the symplectic model-free law; updates ``state`` in place."""
    if not freeze_integral:
        state.corrector_integral += inp.eps * cfg.h
    u = (
        state.previous_u
        - state.gamma_k * (inp.y_dot_prev - inp.ystar_dot)
        + cfg.base.K_P * inp.eps
        + cfg.base.K_I * state.corrector_integral
    )
    if cfg.degenerate:
        state.last_gamma_clamped = False
    else:
        raw = _gamma_next_raw(state.gamma_k, state.gamma_km1, inp.eps_dot, cfg)
        lo, hi = cfg.gamma_band
        gamma_next = raw
        clamped = False
        if gamma_next < lo:
            gamma_next = lo
            clamped = True
        elif gamma_next > hi:
            gamma_next = hi
            clamped = True
        dgdt = (gamma_next - state.gamma_k) / cfg.h_alpha
        u = u + cfg.feedforward_sign * cfg.K_alpha * ipow(dgdt, cfg.nu)
        state.gamma_km1 = state.gamma_k
        state.gamma_k = gamma_next
        state.last_gamma_clamped = clamped
    state.previous_u = u
    state.previous_eps_dot = inp.eps_dot
    return u


def el_residual(
    gamma_km1: float,
    gamma_k: float,
    gamma_kp1: float,
    eps_dot: float,
    cfg: IPisConfig,
) -> float:
    """Stationarity residual of a gamma triple; zero (to rounding) for any
    unclamped triple produced by :func:`ipis_alpha_update`."""
    return gamma_k * eps_dot + cfg.K_alpha * (
        gamma_kp1 - 2.0 * gamma_k + gamma_km1
    ) / ipow(cfg.h_alpha, cfg.nu)


class CriterionIntegrals(NamedTuple):
    """Both sides of the tracking-cost identity over a trace segment."""

    error_integral: float  # integral of (y - y*) = -integral of eps
    lagrangian_integral: float  # integral of (gamma*eps_dot + K_alpha*gdot^nu)/K_P


def alpha_criterion(
    trace_segment: Sequence[tuple[float, float, float]],
    K_P: float,
    K_alpha: float,
    nu: int,
    h: float,
) -> CriterionIntegrals:
    """Rectangle-rule discretization of the tracking-cost identity.

    ``trace_segment`` holds (eps, gamma, gamma_dot) records; eps_dot is taken
    from consecutive eps samples, so at least two records are required.
    """
    if len(trace_segment) < 2:
        raise ValueError("criterion needs a segment of at least 2 records")
    if K_P == 0.0:
        raise ValueError("K_P must be nonzero")
    left = 0.0
    right = 0.0
    for i in range(len(trace_segment) - 1):
        eps_i, gamma_i, gdot_i = trace_segment[i]
        eps_dot = (trace_segment[i + 1][0] - eps_i) / h
        left += -eps_i * h
        right += (gamma_i * eps_dot + K_alpha * ipow(gdot_i, nu)) / K_P * h
    return CriterionIntegrals(left, right)
