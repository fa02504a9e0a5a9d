# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-loop engine.

Line-for-line port of loop_py.run_loop.  Keep every floating-point operation
in the same order with the same expression shape as the pure-Python engine;
the build disables FP contraction so results stay bit-identical between the
two backends.
"""

import numpy as np

from libc.math cimport fabs, isfinite, sqrt, pow

DEF DIVERGENCE_LIMIT = 1e9


cdef inline double _ipow(double base, int exponent) nogil:
    cdef double acc = 1.0
    cdef int i
    for i in range(exponent):
        acc *= base
    return acc


def run_loop(
    int n_steps,
    double h,
    int plant_substeps,
    int plant_kind,
    double[:, ::1] A not None,
    double[::1] B not None,
    double[::1] C not None,
    double D,
    double[::1] x0 not None,
    double[:, ::1] A_aged not None,
    int age_step,
    double E, double L, double Cap,
    double[::1] R_sched not None,
    double buck_i0, double buck_v0,
    double[::1] ystar not None,
    double[::1] ystar_slope not None,
    double[::1] noise not None,
    int ctrl_kind,
    double Kp, double Ki, double Kd,
    double alpha0, double alpha_ramp,
    int nu,
    double K_alpha, double ff_sign,
    double gamma0, double gamma_min, double gamma_max,
    double h_alpha,
    int degenerate,
    double u_min, double u_max,
    int window,
    double[::1] dweights not None,
    double[::1] vweights not None,
    double[::1] out_y not None,
    double[::1] out_meas not None,
    double[::1] out_hat not None,
    double[::1] out_u not None,
    double[::1] out_eps not None,
    double[::1] out_alpha not None,
    double[::1] out_gamma not None,
    int[::1] out_flags not None,
):
    cdef int dim = x0.shape[0]
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] k1 = np.zeros(dim)
    cdef double[::1] k2 = np.zeros(dim)
    cdef double[::1] k3 = np.zeros(dim)
    cdef double[::1] k4 = np.zeros(dim)
    cdef double[::1] xs = np.zeros(dim)
    cdef double[::1] ywin = np.zeros(window)
    cdef double[::1] ewin = np.zeros(window)

    cdef double buck_i = buck_i0
    cdef double buck_v = buck_v0

    cdef int head = 0
    cdef int count = 0
    cdef double prev_u_applied = 0.0
    cdef double integral = 0.0
    cdef double prev_err = 0.0
    cdef double g_k = gamma0
    cdef double g_km1 = gamma0
    cdef int sat_dir = 0
    cdef double prev_meas = 0.0
    cdef double prev_eps = 0.0

    cdef double hs = h / plant_substeps
    cdef double hpow_nu = _ipow(h_alpha, nu)

    cdef int k, i, j, idx, sub
    cdef bint freeze, aged
    cdef int gflag, uflag
    cdef double t, y, meas, ys, eps, ydot, edot, yhat, ysdot
    cdef double alpha_rep, gamma_rep, alpha_t, inv_alpha, derivative
    cdef double u, ua, q, raw, gnext, dgdt

    for k in range(n_steps + 1):
        t = k * h

        # ---- measure
        if plant_kind == 0:
            y = 0.0
            for i in range(dim):
                y += C[i] * x[i]
            y = y + D * prev_u_applied
        else:
            y = buck_v
        if not isfinite(y) or fabs(y) > DIVERGENCE_LIMIT:
            return k
        meas = y + noise[k]
        ys = ystar[k]
        eps = ys - meas

        # ---- sliding windows
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
                ydot += dweights[j] * ywin[idx]
                edot += dweights[j] * ewin[idx]
                yhat += vweights[j] * ywin[idx]
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
        ysdot = ystar_slope[k]

        # ---- control law
        freeze = (sat_dir > 0 and eps > 0.0) or (sat_dir < 0 and eps < 0.0)
        gflag = 0
        alpha_rep = 0.0
        gamma_rep = 0.0
        if ctrl_kind == 0:  # pid
            if not freeze:
                integral = integral + eps * h
            derivative = (eps - prev_err) / h
            prev_err = eps
            u = Kp * eps + Ki * integral + Kd * derivative
        elif ctrl_kind == 1:  # ipi
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
        else:  # ipis
            gamma_rep = g_k
            if nu == 1:
                alpha_rep = g_k
            elif nu == 2:
                alpha_rep = sqrt(g_k)
            else:
                alpha_rep = pow(g_k, 1.0 / nu)
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

        if not isfinite(u) or fabs(u) > DIVERGENCE_LIMIT:
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
            if plant_kind == 0:
                aged = age_step >= 0 and k >= age_step
                for sub in range(plant_substeps):
                    if aged:
                        _rk4_lti(A_aged, B, x, k1, k2, k3, k4, xs, ua, hs, dim)
                    else:
                        _rk4_lti(A, B, x, k1, k2, k3, k4, xs, ua, hs, dim)
            else:
                for sub in range(plant_substeps):
                    _rk4_buck(E, L, Cap, &buck_i, &buck_v, ua, R_sched[k], hs)
        prev_meas = meas
        prev_eps = eps

    return -1


cdef void _lti_deriv(double[:, ::1] A, double[::1] B, double[::1] x,
                     double[::1] out, double u, int dim) nogil:
    cdef int i, j
    cdef double acc
    for i in range(dim):
        acc = 0.0
        for j in range(dim):
            acc += A[i, j] * x[j]
        out[i] = acc + B[i] * u


cdef void _rk4_lti(double[:, ::1] A, double[::1] B, double[::1] x,
                   double[::1] k1, double[::1] k2, double[::1] k3,
                   double[::1] k4, double[::1] xs, double u, double h,
                   int dim) nogil:
    cdef int i
    _lti_deriv(A, B, x, k1, u, dim)
    for i in range(dim):
        xs[i] = x[i] + 0.5 * h * k1[i]
    _lti_deriv(A, B, xs, k2, u, dim)
    for i in range(dim):
        xs[i] = x[i] + 0.5 * h * k2[i]
    _lti_deriv(A, B, xs, k3, u, dim)
    for i in range(dim):
        xs[i] = x[i] + h * k3[i]
    _lti_deriv(A, B, xs, k4, u, dim)
    for i in range(dim):
        x[i] = x[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0


cdef void _rk4_buck(double E, double L, double Cap, double* i_state,
                    double* v_state, double duty, double R, double h) nogil:
    cdef double d = duty
    if d < 0.0:
        d = 0.0
    elif d > 1.0:
        d = 1.0
    cdef double i0 = i_state[0]
    cdef double v0 = v_state[0]
    cdef double di1 = (d * E - v0) / L
    cdef double dv1 = (i0 - v0 / R) / Cap
    cdef double i1 = i0 + 0.5 * h * di1
    cdef double v1 = v0 + 0.5 * h * dv1
    cdef double di2 = (d * E - v1) / L
    cdef double dv2 = (i1 - v1 / R) / Cap
    cdef double i2 = i0 + 0.5 * h * di2
    cdef double v2 = v0 + 0.5 * h * dv2
    cdef double di3 = (d * E - v2) / L
    cdef double dv3 = (i2 - v2 / R) / Cap
    cdef double i3 = i0 + h * di3
    cdef double v3 = v0 + h * dv3
    cdef double di4 = (d * E - v3) / L
    cdef double dv4 = (i3 - v3 / R) / Cap
    i_state[0] = i0 + h * (di1 + 2.0 * di2 + 2.0 * di3 + di4) / 6.0
    v_state[0] = v0 + h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
