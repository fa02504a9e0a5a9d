"""Plant model tests: realization, integrators, schedules, noise."""

import math

import numpy as np
import pytest

from modelfree.plants import (
    BuckConverter,
    NoiseSource,
    ParameterSchedule,
    PoleAtOriginError,
    RealizationError,
    TransferFunction,
    dc_gain,
    noisy_measure,
    realize,
    schedule_value,
    step_buck,
    step_lti,
)

PLANT_NUM = (1.0, 4.0, 4.0)
PLANT_DEN = (1.0, 3.0, 3.0, 1.0)


# ------------------------------------------------------------- realization


def test_first_order_canonical_form():
    p = realize(TransferFunction((1.0,), (1.0, 1.0)))
    assert p.A == ((-1.0,),)
    assert p.B == (1.0,)
    assert p.C == (1.0,)
    assert p.D == 0.0
    assert p.state == [0.0]


def test_improper_tf_rejected():
    with pytest.raises(RealizationError):
        realize(TransferFunction((1.0, 0.0, 1.0), (1.0, 1.0)))


def test_static_gain_rejected():
    with pytest.raises(RealizationError):
        realize(TransferFunction((2.0,), (1.0,)))


def markov_parameters(num, den, count):
    """Impulse-response (Markov) parameters by long division — the oracle.

    With monic denominator s^n + a1 s^(n-1) + ... + an and numerator padded
    to b0 s^n + ... + bn:  h_0 = b_0,  h_k = b_k - sum_{j=1..min(k,n)} a_j h_{k-j}.
    Returns h_1..h_count (h_0 is the direct feedthrough).
    """
    a0 = den[0]
    a = [c / a0 for c in den]
    n = len(a) - 1
    b = [0.0] * (n + 1 - len(num)) + [c / a0 for c in num]
    h = [b[0]]
    for k in range(1, count + 1):
        acc = b[k] if k <= n else 0.0
        for j in range(1, min(k, n) + 1):
            acc -= a[j] * h[k - j]
        h.append(acc)
    return h[1:]


def test_markov_parameters_match_realization():
    cases = [
        (PLANT_NUM, PLANT_DEN),
        ((1.0,), (1.0, 1.0)),
        ((2.0, 1.0), (1.0, 0.5, 2.0, 0.25)),
    ]
    for num, den in cases:
        p = realize(TransferFunction(num, den))
        A = np.array(p.A)
        B = np.array(p.B)
        C = np.array(p.C)
        want = markov_parameters(num, den, 3)
        got = [float(C @ np.linalg.matrix_power(A, k) @ B) for k in range(3)]
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_paper_plant_step_response_steady_state():
    # dc gain 4 by the final-value theorem
    p = realize(TransferFunction(PLANT_NUM, PLANT_DEN))
    y = 0.0
    for _ in range(40000):
        y = step_lti(p, 1.0, 1e-3)
    assert y == pytest.approx(4.0, abs=1e-6)


def test_dc_gain():
    assert dc_gain(TransferFunction(PLANT_NUM, PLANT_DEN)) == pytest.approx(4.0)
    assert dc_gain(TransferFunction((1.0,), (1.0, 1.0))) == 1.0
    assert dc_gain(TransferFunction((1.0, 0.0), (1.0, 1.0))) == 0.0
    with pytest.raises(PoleAtOriginError):
        dc_gain(TransferFunction((1.0,), (1.0, 0.0)))


# --------------------------------------------------------------- LTI steps


def test_integrator_step_is_exact():
    p = realize(TransferFunction((1.0,), (1.0, 0.0)))
    y = step_lti(p, 1.0, 0.01)
    assert y == pytest.approx(0.01, rel=1e-15)


def test_zero_input_stays_at_rest():
    p = realize(TransferFunction(PLANT_NUM, PLANT_DEN))
    for _ in range(100):
        assert step_lti(p, 0.0, 0.01) == 0.0


def test_first_order_step_response_matches_analytic():
    # oracle: y(t) = 1 - exp(-t)
    p = realize(TransferFunction((1.0,), (1.0, 1.0)))
    h = 1e-3
    y = 0.0
    for _ in range(5000):
        y = step_lti(p, 1.0, h)
    assert y == pytest.approx(1.0 - math.exp(-5.0), abs=1e-9)
    # by 15 time constants the response is at its final value to 1e-6
    for _ in range(10000):
        y = step_lti(p, 1.0, h)
    assert y == pytest.approx(1.0, abs=1e-6)


def test_rk4_order_on_first_order_plant():
    def max_error(h, t_end=2.0):
        p = realize(TransferFunction((1.0,), (1.0, 1.0)))
        n = int(round(t_end / h))
        worst = 0.0
        for k in range(1, n + 1):
            y = step_lti(p, 1.0, h)
            worst = max(worst, abs(y - (1.0 - math.exp(-k * h))))
        return worst

    e1 = max_error(0.05)
    e2 = max_error(0.025)
    assert e1 / e2 >= 8.0


# -------------------------------------------------------------------- buck


def test_buck_equilibrium_at_half_duty():
    b = BuckConverter()
    v = 0.0
    for _ in range(200000):
        v = step_buck(b, 0.5, 10.0, 1e-6)
    assert v == pytest.approx(10.0, abs=1e-6)
    assert b.inductor_current == pytest.approx(1.0, abs=1e-6)


def test_buck_zero_duty_stays_at_rest():
    b = BuckConverter()
    for _ in range(1000):
        assert step_buck(b, 0.0, 10.0, 1e-6) == 0.0


def test_buck_load_step_moves_current_not_voltage():
    # equilibrium oracle: v = d E, i = v / R
    b = BuckConverter()
    for _ in range(200000):
        step_buck(b, 0.5, 10.0, 1e-6)
    for _ in range(300000):
        step_buck(b, 0.5, 18.0, 1e-6)
    assert b.capacitor_voltage == pytest.approx(10.0, abs=1e-6)
    assert b.inductor_current == pytest.approx(10.0 / 18.0, abs=1e-6)


def test_buck_duty_clamped():
    b1 = BuckConverter()
    b2 = BuckConverter()
    step_buck(b1, 1.7, 10.0, 1e-6)
    step_buck(b2, 1.0, 10.0, 1e-6)
    assert b1.capacitor_voltage == b2.capacitor_voltage
    assert b1.inductor_current == b2.inductor_current


def test_buck_converges_from_any_initial_state():
    # fixed duty, fixed load: (i, v) -> (dE/R, dE) over a 3x3 grid
    d, R = 0.5, 10.0
    for i0 in (-1.0, 0.0, 3.0):
        for v0 in (-5.0, 0.0, 25.0):
            b = BuckConverter(inductor_current=i0, capacitor_voltage=v0)
            for _ in range(300000):
                step_buck(b, d, R, 1e-6)
            assert b.capacitor_voltage == pytest.approx(d * 20.0, abs=1e-5)
            assert b.inductor_current == pytest.approx(d * 20.0 / R, abs=1e-5)


# --------------------------------------------------------------- schedules


def test_ramp_schedule_interpolates_the_load_profile():
    s = ParameterSchedule(((0.003, 10.0), (0.01, 18.0)), "ramp")
    assert schedule_value(s, 0.0065) == pytest.approx(14.0)
    assert schedule_value(s, 0.0) == 10.0
    assert schedule_value(s, 99.0) == 18.0


def test_hold_schedule():
    s = ParameterSchedule(((0.0, 5.0),), "hold")
    for t in (0.0, 0.1, 7.0):
        assert schedule_value(s, t) == 5.0
    s2 = ParameterSchedule(((0.0, 5.0), (1.0, 9.0)), "hold")
    assert schedule_value(s2, 0.999) == 5.0
    assert schedule_value(s2, 1.0) == 9.0


def test_empty_schedule_rejected():
    s = ParameterSchedule(((0.0, 5.0),), "hold")
    object.__setattr__(s, "breakpoints", ())
    with pytest.raises(ValueError):
        schedule_value(s, 0.0)


def test_schedule_times_must_increase():
    with pytest.raises(ValueError):
        ParameterSchedule(((0.0, 1.0), (0.0, 2.0)), "ramp")


def test_ramp_schedule_is_lipschitz_with_declared_constant():
    s = ParameterSchedule(((0.0, 0.0), (1.0, 4.0), (3.0, 2.0)), "ramp")
    worst = s.max_abs_slope
    assert worst == pytest.approx(4.0)
    ts = np.linspace(-0.5, 3.5, 801)
    vals = [schedule_value(s, float(t)) for t in ts]
    slopes = np.abs(np.diff(vals) / np.diff(ts))
    assert np.max(slopes) <= worst * (1.0 + 1e-9)


# ------------------------------------------------------------------- noise


def test_zero_amplitude_noise_is_exact():
    n = NoiseSource(seed=3, amplitude=0.0)
    for _ in range(10):
        assert noisy_measure(n, 1.25) == 1.25


def test_same_seed_same_stream():
    a = NoiseSource(seed=42, amplitude=0.5)
    b = NoiseSource(seed=42, amplitude=0.5)
    xs = [noisy_measure(a, 0.0) for _ in range(100)]
    ys = [noisy_measure(b, 0.0) for _ in range(100)]
    assert xs == ys


def test_noise_standard_deviation():
    n = NoiseSource(seed=12345, amplitude=0.01)
    draws = n.stream(100000)
    assert 0.0097 <= float(np.std(draws)) <= 0.0103
