"""Pure-Python closed-loop engine.

This is the reference implementation of the hot loop; ``_loop_cy.pyx`` is a
line-for-line port of it.  Keep the two in lockstep: every floating-point
operation must happen in the same order with the same expression shape, or
the byte-identical-trace guarantee between backends breaks.  No numpy math
inside the loop (BLAS reductions reorder sums); inputs are converted to plain
Python floats up front.
"""

from __future__ import annotations

import math

DIVERGENCE_LIMIT = 1e9

# controller kinds
PID, IPI, IPIS = 0, 1, 2
# plant kinds
LTI, BUCK = 0, 1


def _ipow(base: float, exponent: int) -> float:
    acc = 1.0
    for _ in range(exponent):
        acc *= base
    return acc


def run_loop(
    n_steps: int,
    h: float,
    plant_substeps: int,
    plant_kind: int,
    A, B, C, D: float,
    x0,
    A_aged,
    age_step: int,
    E: float, L: float, Cap: float,
    R_sched,
    buck_i0: float, buck_v0: float,
    ystar, ystar_slope,
    noise,
    ctrl_kind: int,
    Kp: float, Ki: float, Kd: float,
    alpha0: float, alpha_ramp: float,
    nu: int,
    K_alpha: float, ff_sign: float,
    gamma0: float, gamma_min: float, gamma_max: float,
    h_alpha: float,
    degenerate: int,
    u_min: float, u_max: float,
    window: int, dweights, vweights,
    out_y, out_meas, out_hat, out_u, out_eps, out_alpha, out_gamma, out_flags,
) -> int:
    """Run the closed loop; fill the out arrays.  Returns -1 on success or
    the step index at which the divergence guard fired."""
    # plain-float copies of everything touched inside the loop
    ystar_l = [float(v) for v in ystar]
    yslope_l = [float(v) for v in ystar_slope]
    noise_l = [float(v) for v in noise]
    dw = [float(v) for v in dweights]
    vw = [float(v) for v in vweights]

    dim = 0
    Al: list[list[float]] = []
    Aged: list[list[float]] = []
    Bl: list[float] = []
    Cl: list[float] = []
    x: list[float] = []
    Rl: list[float] = []
    if plant_kind == LTI:
        dim = len(x0)
        Al = [[float(A[i][j]) for j in range(dim)] for i in range(dim)]
        Aged = [[float(A_aged[i][j]) for j in range(dim)] for i in range(dim)]
        Bl = [float(v) for v in B]
        Cl = [float(v) for v in C]
        x = [float(v) for v in x0]
    else:
        Rl = [float(v) for v in R_sched]
    Df = float(D)

    buck_i = float(buck_i0)
    buck_v = float(buck_v0)

    ywin = [0.0] * window
    ewin = [0.0] * window
    head = 0
    count = 0

    prev_u_applied = 0.0  # feedthrough + recursion seed
    integral = 0.0
    prev_err = 0.0  # pid backward difference
    g_k = gamma0
    g_km1 = gamma0
    sat_dir = 0  # -1 clamped low, +1 clamped high on the previous step
    prev_meas = 0.0
    prev_eps = 0.0

    hs = h / plant_substeps
    hpow_nu = _ipow(h_alpha, nu)

    for k in range(n_steps + 1):
        t = k * h

        # ---- measure
        if plant_kind == LTI:
            y = 0.0
            for i in range(dim):
                y += Cl[i] * x[i]
            y = y + Df * prev_u_applied
        else:
            y = buck_v
        if not math.isfinite(y) or abs(y) > DIVERGENCE_LIMIT:
            return k
        meas = y + noise_l[k]
        ys = ystar_l[k]
        eps = ys - meas

        # ---- sliding windows (ring buffers; head = next insert = oldest)
        ywin[head] = meas
        ewin[head] = eps
        head += 1
        if head == window:
            head = 0
        if count < window:
            count += 1

        # ---- estimator / warm-up inputs
        if count == window:
            ydot = 0.0
            edot = 0.0
            yhat = 0.0
            idx = head
            for j in range(window):
                ydot += dw[j] * ywin[idx]
                edot += dw[j] * ewin[idx]
                yhat += vw[j] * ywin[idx]
                idx += 1
                if idx == window:
                    idx = 0
        else:
            if k >= 1:
                ydot = (meas - prev_meas) / h
                edot = (eps - prev_eps) / h
            else:
                ydot = 0.0
                edot = 0.0
            yhat = meas
        ysdot = yslope_l[k]

        # ---- control law
        # conditional anti-windup: freeze the integral only when it would
        # push the input deeper into the active saturation
        freeze = (sat_dir > 0 and eps > 0.0) or (sat_dir < 0 and eps < 0.0)
        gflag = 0
        alpha_rep = 0.0
        gamma_rep = 0.0
        if ctrl_kind == PID:
            if not freeze:
                integral = integral + eps * h
            derivative = (eps - prev_err) / h
            prev_err = eps
            u = Kp * eps + Ki * integral + Kd * derivative
        elif ctrl_kind == IPI:
            alpha_t = alpha0 + alpha_ramp * t
            inv_alpha = 1.0 / alpha_t
            if not freeze:
                integral = integral + eps * h
            u = (
                prev_u_applied
                - inv_alpha * (ydot - ysdot)
                + Kp * eps
                + Ki * integral
            )
            alpha_rep = alpha_t
        else:  # IPIS
            gamma_rep = g_k
            if nu == 1:
                alpha_rep = g_k
            elif nu == 2:
                alpha_rep = math.sqrt(g_k)
            else:
                alpha_rep = g_k ** (1.0 / nu)
            if not freeze:
                integral = integral + eps * h
            u = (
                prev_u_applied
                - g_k * (ydot - ysdot)
                + Kp * eps
                + Ki * integral
            )
            if not degenerate:
                q = (hpow_nu / K_alpha) * edot
                raw = -(q - 2.0) * g_k - g_km1
                gnext = raw
                if gnext < gamma_min:
                    gnext = gamma_min
                    gflag = 2
                elif gnext > gamma_max:
                    gnext = gamma_max
                    gflag = 2
                dgdt = (gnext - g_k) / h_alpha
                u = u + ff_sign * K_alpha * _ipow(dgdt, nu)
                g_km1 = g_k
                g_k = gnext

        if not math.isfinite(u) or abs(u) > DIVERGENCE_LIMIT:
            return k

        # ---- actuator clamp
        ua = u
        uflag = 0
        sat_dir = 0
        if ua < u_min:
            ua = u_min
            uflag = 1
            sat_dir = -1
        elif ua > u_max:
            ua = u_max
            uflag = 1
            sat_dir = 1
        prev_u_applied = ua

        # ---- record
        out_y[k] = y
        out_meas[k] = meas
        out_hat[k] = yhat
        out_u[k] = ua
        out_eps[k] = eps
        out_alpha[k] = alpha_rep
        out_gamma[k] = gamma_rep
        out_flags[k] = uflag | gflag

        # ---- advance plant
        if k < n_steps:
            if plant_kind == LTI:
                Acur = Al if (age_step < 0 or k < age_step) else Aged
                for _ in range(plant_substeps):
                    x = _rk4_lti(Acur, Bl, x, ua, hs, dim)
            else:
                Rk = Rl[k]
                for _ in range(plant_substeps):
                    buck_i, buck_v = _rk4_buck(E, L, Cap, buck_i, buck_v, ua, Rk, hs)
        prev_meas = meas
        prev_eps = eps

    return -1


def _rk4_lti(Al, Bl, x, u, h, dim):
    k1 = _lti_deriv(Al, Bl, x, u, dim)
    x2 = [x[i] + 0.5 * h * k1[i] for i in range(dim)]
    k2 = _lti_deriv(Al, Bl, x2, u, dim)
    x3 = [x[i] + 0.5 * h * k2[i] for i in range(dim)]
    k3 = _lti_deriv(Al, Bl, x3, u, dim)
    x4 = [x[i] + h * k3[i] for i in range(dim)]
    k4 = _lti_deriv(Al, Bl, x4, u, dim)
    return [
        x[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
        for i in range(dim)
    ]


def _lti_deriv(Al, Bl, x, u, dim):
    out = [0.0] * dim
    for i in range(dim):
        acc = 0.0
        row = Al[i]
        for j in range(dim):
            acc += row[j] * x[j]
        out[i] = acc + Bl[i] * u
    return out


def _rk4_buck(E, L, Cap, i0, v0, duty, R, h):
    d = duty
    if d < 0.0:
        d = 0.0
    elif d > 1.0:
        d = 1.0
    di1 = (d * E - v0) / L
    dv1 = (i0 - v0 / R) / Cap
    i1 = i0 + 0.5 * h * di1
    v1 = v0 + 0.5 * h * dv1
    di2 = (d * E - v1) / L
    dv2 = (i1 - v1 / R) / Cap
    i2 = i0 + 0.5 * h * di2
    v2 = v0 + 0.5 * h * dv2
    di3 = (d * E - v2) / L
    dv3 = (i2 - v2 / R) / Cap
    i3 = i0 + h * di3
    v3 = v0 + h * dv3
    di4 = (d * E - v3) / L
    dv4 = (i3 - v3 / R) / Cap
    return (
        i0 + h * (di1 + 2.0 * di2 + 2.0 * di3 + di4) / 6.0,
        v0 + h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0,
    )
