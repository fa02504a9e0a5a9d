"""Sliding-window algebraic estimation of a noisy signal's value and slope.

Over a window of duration ``T`` (window-local time ``t`` running from 0 at the
oldest sample) the two estimators are weighted integrals of the signal:

    derivative:  -(6 / T^3) * integral_0^T (T - 2 t) y(t) dt
    value:        (2 / T^2) * integral_0^T (2 T - 3 t) y(t) dt

Both integrals are evaluated with a product rule: the signal is interpolated
linearly between samples and the kernel-times-interpolant integral is taken
exactly on each subinterval.  The rule therefore reproduces affine signals to
rounding error, which the closed-loop harness relies on.  Both estimates refer
to the window start (the anchor), i.e. they arrive delayed by one window
length; the harness accounts for that delay when it wires them into the
control law.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "SequencingError",
    "SpacingError",
    "InsufficientDataError",
    "SlidingWindow",
    "EstimatorOutput",
    "sliding_window",
    "push_sample",
    "is_full",
    "estimator_weights",
    "estimate_derivative",
    "estimate_value",
    "estimate",
]

# |dt - h| <= SPACING_RTOL * h is accepted as uniform spacing
SPACING_RTOL = 1e-12


class SequencingError(ValueError):
    """Sample pushed with a time at or before the newest sample."""


class SpacingError(ValueError):
    """Sample pushed with a time increment different from the window step."""


class InsufficientDataError(RuntimeError):
    """Estimate requested before the window spans its full duration."""


@dataclass(frozen=True)
class SlidingWindow:
    """Fixed-duration buffer of uniformly spaced (time, value) samples.

    ``capacity_duration`` is the window length T; ``step`` the sample spacing
    h.  Value semantics: :func:`push_sample` returns a new window.
    """

    capacity_duration: float
    step: float
    samples: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.step <= 0.0:
            raise ValueError("window step must be positive")
        if self.capacity_duration / self.step < 2.0 - 1e-9:
            raise ValueError("window must span at least 2 steps (3 samples)")

    @property
    def capacity_samples(self) -> int:
        return int(round(self.capacity_duration / self.step)) + 1

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(y for _, y in self.samples)


def sliding_window(window_samples: int, step: float) -> SlidingWindow:
    """Empty window holding ``window_samples`` samples spaced by ``step``."""
    if window_samples < 3:
        raise ValueError("window needs at least 3 samples")
    return SlidingWindow(capacity_duration=(window_samples - 1) * step, step=step)


def push_sample(window: SlidingWindow, t: float, y: float) -> SlidingWindow:
    """Append a sample, evicting samples older than ``t - capacity_duration``."""
    if window.samples:
        t_prev = window.samples[-1][0]
        if t <= t_prev:
            raise SequencingError(
                f"sample at t={t!r} does not follow newest sample at t={t_prev!r}"
            )
        dt = t - t_prev
        if abs(dt - window.step) > SPACING_RTOL * window.step:
            raise SpacingError(
                f"sample spacing {dt!r} differs from window step {window.step!r}"
            )
    kept = window.samples + ((t, y),)
    if len(kept) > window.capacity_samples:
        kept = kept[len(kept) - window.capacity_samples:]
    return SlidingWindow(window.capacity_duration, window.step, kept)


def is_full(window: SlidingWindow) -> bool:
    return len(window.samples) == window.capacity_samples


@dataclass(frozen=True)
class EstimatorOutput:
    """Window-start (anchor) estimates of the signal value and derivative."""

    value_estimate: float
    derivative_estimate: float
    anchor_time: float


@lru_cache(maxsize=64)
def estimator_weights(
    window_samples: int, step: float
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-sample weights (derivative, value) of the product-rule integrals.

    On each subinterval the kernel is integrated exactly against the linear
    interpolant of the samples, so any signal that is affine across the window
    is reproduced exactly (up to rounding).
    """
    w = window_samples
    h = step
    if w < 3:
        raise ValueError("window needs at least 3 samples")
    T = (w - 1) * h
    dw = [0.0] * w
    vw = [0.0] * w
    for i in range(w - 1):
        a = T - 2.0 * (i * h)  # derivative kernel value at the left node
        dw[i] += h * (a / 2.0 - h / 3.0)
        dw[i + 1] += h * (a / 2.0 - 2.0 * h / 3.0)
        b = 2.0 * T - 3.0 * (i * h)  # value kernel at the left node
        vw[i] += h * (b / 2.0 - h / 2.0)
        vw[i + 1] += h * (b / 2.0 - h)
    sd = -6.0 / (T * T * T)
    sv = 2.0 / (T * T)
    return tuple(sd * x for x in dw), tuple(sv * x for x in vw)


def _require_full(window: SlidingWindow) -> None:
    if not is_full(window):
        raise InsufficientDataError(
            f"window holds {len(window.samples)} of {window.capacity_samples} samples"
        )


def estimate_derivative(window: SlidingWindow) -> float:
    """Slope estimate over a full window (anchored at the window start)."""
    _require_full(window)
    dw, _ = estimator_weights(window.capacity_samples, window.step)
    acc = 0.0
    for c, (_, y) in zip(dw, window.samples):
        acc += c * y
    return acc


def estimate_value(window: SlidingWindow) -> float:
    """Denoised value estimate at the window start."""
    _require_full(window)
    _, vw = estimator_weights(window.capacity_samples, window.step)
    acc = 0.0
    for c, (_, y) in zip(vw, window.samples):
        acc += c * y
    return acc


def estimate(window: SlidingWindow) -> EstimatorOutput:
    """Both estimates plus the anchor instant they refer to."""
    _require_full(window)
    return EstimatorOutput(
        value_estimate=estimate_value(window),
        derivative_estimate=estimate_derivative(window),
        anchor_time=window.samples[0][0],
    )
