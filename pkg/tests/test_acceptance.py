"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; plain `pytest` reports the same tests pass/fail by name.
"""

import math

import numpy as np
import pytest

from modelfree.cli import PRESETS, cmd_preset, preset_path
from modelfree.controllers import (
    BroidaModel,
    IPiConfig,
    IPisConfig,
    broida_gains,
    el_residual,
    ipis_alpha_update,
)
from modelfree.estimation import (
    estimate_derivative,
    estimate_value,
    push_sample,
    sliding_window,
)
from modelfree.harness import DivergenceError, compute_metrics, run_closed_loop
from modelfree.oscillator import (
    OscillatorParams,
    OscillatorState,
    explicit_euler_step,
    oscillator_energy,
    rk4_oscillator_step,
    symplectic_euler_step,
)
from modelfree.scenario import load_scenario, parse_scenario_text


def _ok(n, msg):
    print(f"criterion {n:2d}: PASS — {msg}")


def load_preset(name):
    return load_scenario(preset_path(name))


def test_criterion_01_broida_gains():
    g = broida_gains(BroidaModel(K=4.0, T=2.018, tau=0.2424))
    assert abs(g.K_P - 1.8181) <= 1e-3
    assert abs(g.K_I - 0.7754) <= 1e-3
    assert abs(g.K_D - 0.1766) <= 1e-3
    _ok(1, f"Broida gains ({g.K_P:.5f}, {g.K_I:.5f}, {g.K_D:.5f}) "
           "within 1e-3 of (1.8181, 0.7754, 0.1766)")


def test_criterion_02_differentiator_exactness():
    worst = 0.0
    for a in (0.0, 1.0, -12.5, 1000.0):
        for b in (0.0, -1.0, 12.5, -1000.0):
            for n, t_span in ((100, 0.05), (150, 1.0), (257, 20.0)):
                h = t_span / (n - 1)
                w = sliding_window(n, h)
                for k in range(n):
                    w = push_sample(w, k * h, a + b * (k * h))
                tol = 1e-9 * max(1.0, abs(a), abs(b))
                verr = abs(estimate_value(w) - a)
                derr = abs(estimate_derivative(w) - b)
                assert verr <= tol and derr <= tol, (a, b, n, t_span)
                worst = max(worst, verr / tol, derr / tol)
    _ok(2, f"affine value/derivative errors <= 1e-9*max(1,|a|,|b|) "
           f"(worst {worst:.2e} of budget)")


def test_criterion_03_energy_demo():
    unit = OscillatorParams(m=1.0, k=1.0)
    h, steps = 0.01, 100000

    s = OscillatorState(1.0, 0.0)
    worst = 0.0
    for _ in range(steps):
        s = symplectic_euler_step(s, unit, h)
        worst = max(worst, abs(oscillator_energy(s, unit) - 0.5) / 0.5)
    assert worst <= 0.01

    # explicit Euler: E_n = 0.5 * (1 + h^2)^n exactly; +10% within 1e5 steps
    n_closed = math.ceil(math.log(1.1) / math.log(1.0 + h * h))
    assert n_closed <= steps
    s = OscillatorState(1.0, 0.0)
    n = 0
    while oscillator_energy(s, unit) <= 0.55:
        s = explicit_euler_step(s, unit, h)
        n += 1
    assert n == n_closed

    s = OscillatorState(1.0, 0.0)
    for _ in range(steps):
        s = rk4_oscillator_step(s, unit, h)
    rk4_drift = abs(oscillator_energy(s, unit) - 0.5) / 0.5
    assert rk4_drift <= 1e-6

    # qualitative ordering: symplectic bounded, explicit grows, rk4 tiny drift
    assert rk4_drift < worst < 0.1
    _ok(3, f"symplectic |dE|/E <= {worst:.4f}, explicit +10% at step "
           f"{n_closed}, RK4 drift {rk4_drift:.2e}")


def test_criterion_04_lti_tracking():
    _, m_pid = run_closed_loop(load_preset("lti-pid.scn"))
    _, m_ipi = run_closed_loop(load_preset("lti-ipi.scn"))
    # unit reference: steady-state error below 1% of the reference span
    assert m_pid.settled and m_pid.steady_state_error < 0.01
    assert m_ipi.settled and m_ipi.steady_state_error < 0.01
    ratio = m_ipi.iae / m_pid.iae
    assert ratio <= 1.2
    _ok(4, f"PID sse={m_pid.steady_state_error:.2e}, "
           f"i-PI sse={m_ipi.steady_state_error:.2e}, iae ratio={ratio:.3f} <= 1.2")


def test_criterion_05_ageing_superiority():
    tr_pid, _ = run_closed_loop(load_preset("lti-pid-ageing.scn"))
    tr_ipi, _ = run_closed_loop(load_preset("lti-ipi-ageing.scn"))
    k_shift = 15000  # ageing at t = 15 s, h = 1e-3
    iae_pid = compute_metrics(tr_pid, start=k_shift).iae
    iae_ipi = compute_metrics(tr_ipi, start=k_shift).iae
    assert iae_ipi < iae_pid
    _ok(5, f"post-shift iae: i-PI {iae_ipi:.4f} < PID {iae_pid:.4f} "
           f"(ratio {iae_ipi / iae_pid:.3f})")


def test_criterion_06_el_residual_property():
    rng = np.random.RandomState(20240817)
    checked = 0
    worst = 0.0
    for seq in range(10000):
        nu = 1 if seq % 4 else 2
        h = float(rng.uniform(3e-3, 0.3)) if nu == 1 else float(rng.uniform(0.1, 1.0))
        gamma0 = float(rng.uniform(0.2, 3.0))
        K_alpha = float(rng.uniform(0.5, 4.0)) * (1.0 if seq % 2 else -1.0)
        cfg = IPisConfig(
            base=IPiConfig(alpha=gamma0, K_P=1.0, K_I=0.0),
            h=h, nu=nu, K_alpha=K_alpha,
            gamma_band=(0.1 * gamma0, 10.0 * gamma0),
        )
        g_prev = gamma0
        g_cur = gamma0 * float(rng.uniform(0.95, 1.05))
        sigma = float(rng.choice([0.0, 0.1, 10.0, 1000.0]))
        for _ in range(10):
            eps_dot = float(rng.standard_normal()) * sigma
            g_next = ipis_alpha_update(g_cur, g_prev, eps_dot, cfg)
            lo, hi = cfg.gamma_band
            if lo < g_next < hi:  # unclamped triples only
                res = el_residual(g_prev, g_cur, g_next, eps_dot, cfg)
                rel = abs(res) / max(1.0, abs(g_cur * eps_dot))
                assert rel <= 1e-9, (seq, nu, h, gamma0, K_alpha, eps_dot)
                worst = max(worst, rel)
                checked += 1
            g_prev, g_cur = g_cur, g_next
    assert checked > 50000
    _ok(6, f"{checked} unclamped triples over 10000 sequences, "
           f"worst |residual| {worst:.2e} relative (<= 1e-9)")


def _random_scenario_pair(rng):
    """An ipi scenario and its degenerate-ipis twin (gamma frozen at 1/alpha,
    feedforward off) differing in nothing else."""
    alpha = float(rng.uniform(0.3, 30.0))
    kp = float(rng.uniform(0.0, 5.0))
    ki = float(rng.uniform(0.0, 2.0))
    window = int(rng.randint(3, 12))
    if rng.rand() < 0.5:
        poles = -rng.uniform(0.2, 5.0, size=int(rng.randint(1, 4)))
        den = np.poly(poles)
        num = [float(rng.uniform(0.2, 3.0))]
        h = 0.01
        duration = h * int(rng.randint(60, 300))
        plant = (
            "plant.kind = lti\n"
            f"plant.numerator = {num}\n"
            f"plant.denominator = {[float(c) for c in den]}\n"
        )
        ref_t = round(float(rng.uniform(0.1, 0.5 * duration)), 6)
        ref = f"[[0.0, 0.0], [{ref_t}, {float(rng.uniform(0.5, 2.0))}]]"
        slope = 1e9
    else:
        h = 1e-6
        duration = h * int(rng.randint(100, 500))
        plant = (
            "plant.kind = buck\n"
            "plant.E = 20.0\nplant.L = 1e-3\nplant.C = 1e-5\n"
            f"plant.R_schedule = [[0.0, {float(rng.uniform(5.0, 20.0))}]]\n"
        )
        ref_t = round(float(rng.uniform(20, 400)) * h, 9)
        ref = f"[[0.0, 0.0], [{ref_t}, {float(rng.uniform(2.0, 15.0))}]]"
        slope = 1e9
    common = (
        f"{plant}"
        f"reference.kind = ramp\n"
        f"reference.breakpoints = {ref}\n"
        f"reference.max_slope = {slope}\n"
        f"sim.h = {h}\n"
        f"sim.duration = {duration}\n"
        f"estimator.window_samples = {window}\n"
        f"noise.seed = {int(rng.randint(0, 10000))}\n"
        f"noise.amplitude = {float(rng.choice([0.0, 0.01]))}\n"
    )
    ipi = common + (
        "controller.kind = ipi\n"
        f"controller.alpha0 = {alpha}\n"
        f"controller.Kp = {kp}\ncontroller.Ki = {ki}\n"
    )
    g0 = 1.0 / alpha
    ipis = common + (
        "controller.kind = ipis\n"
        f"controller.alpha0 = {g0}\n"
        f"controller.Kp = {kp}\ncontroller.Ki = {ki}\n"
        "controller.nu = 1\ncontroller.degenerate = 1\n"
        f"controller.gamma_band = [{0.5 * g0}, {2.0 * g0}]\n"
    )
    return parse_scenario_text(ipi), parse_scenario_text(ipis)


def test_criterion_07_degeneration_equivalence():
    rng = np.random.RandomState(411)
    diverged = 0
    for case in range(100):
        s_ipi, s_ipis = _random_scenario_pair(rng)
        try:
            tr_a, _ = run_closed_loop(s_ipi)
        except DivergenceError as da:
            with pytest.raises(DivergenceError) as db:
                run_closed_loop(s_ipis)
            assert db.value.step == da.step  # identical up to the same step
            diverged += 1
            continue
        tr_b, _ = run_closed_loop(s_ipis)
        assert np.array_equal(tr_a.u, tr_b.u), case
        assert np.array_equal(tr_a.y, tr_b.y), case
        assert np.array_equal(tr_a.y_hat, tr_b.y_hat), case
        assert np.array_equal(tr_a.eps, tr_b.eps), case
    _ok(7, f"100 randomized scenario pairs bit-identical "
           f"({diverged} diverged identically)")


def test_criterion_08_buck_ipis_vs_ipi():
    _, m_ipi = run_closed_loop(load_preset("buck-ipi.scn"))
    _, m_ipis = run_closed_loop(load_preset("buck-ipis.scn"))
    assert m_ipi.settled
    assert m_ipis.settled
    ratio = m_ipis.iae / m_ipi.iae
    assert ratio <= 1.05
    _ok(8, f"both settle; iae(i-PIS)/iae(i-PI) = {ratio:.4f} <= 1.05")


def test_criterion_09_load_ramp_robustness():
    stats = []
    for name in ("buck-ipis-load.scn", "buck-ipis-load-a10.scn"):
        tr, m = run_closed_loop(load_preset(name))  # no DivergenceError
        assert m.settled, name
        rel = m.alpha_final_window_std / abs(m.alpha_final_window_mean)
        assert rel < 0.10, name
        stats.append((m.alpha_final_window_mean, rel))
    _ok(9, "alpha0=3 and alpha0=10 both complete and settle; final-window "
           f"alpha (mean, std/mean) = ({stats[0][0]:.3f}, {stats[0][1]:.3f}) "
           f"and ({stats[1][0]:.3f}, {stats[1][1]:.3f})")


def test_criterion_10_preset_determinism(tmp_path):
    for name in PRESETS:
        out1 = tmp_path / f"{name}-1"
        out2 = tmp_path / f"{name}-2"
        assert cmd_preset(name, out1) == 0, name
        assert cmd_preset(name, out2) == 0, name
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2 and files1, name
        for f in files1:
            assert (out1 / f).read_bytes() == (out2 / f).read_bytes(), (name, f)
    _ok(10, f"all {len(PRESETS)} presets byte-identical across repeated runs")
