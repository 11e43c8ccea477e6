"""Compiled inner loops for the forward-backward sweep.

These kernels mirror model.rhs, optimizer.adjoint_rhs and the RK4 rules
in integrator.py term for term, so the compiled and plain-Python paths
produce bit-identical trajectories; a test asserts exact agreement. The
kernels exist only for speed: one sweep over a 5000-step grid drops from
tens of milliseconds to well under one.

Parameter vectors are float64 arrays laid out as model.PARAMETER_FIELDS:
[beta, mu, delta, phi, omega, omega_r, sigma, sigma_r, tau0, tau1, tau2,
eps1, eps2, n_total]. Controls are (n_nodes, 2) arrays. The sweep
functions return (values, status) where status is -1 on success or the
index of the first grid node at which a non-finite value appeared; the
caller turns that into an exception.

The first call in a fresh environment pays a compilation delay of a few
seconds; compiled code is cached on disk after that.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def state_rhs(s, l1, i, l2, r, u1, u2, p):
    beta, mu, delta, phi = p[0], p[1], p[2], p[3]
    omega, omega_r, sigma, sigma_r = p[4], p[5], p[6], p[7]
    tau0, tau1, tau2, eps1, eps2, ntot = p[8], p[9], p[10], p[11], p[12], p[13]
    foi = beta * i / ntot
    ds = mu * ntot - foi * s - mu * s
    dl1 = foi * (s + sigma * l2 + sigma_r * r) - (delta + tau1 + mu) * l1
    di = phi * delta * l1 + omega * l2 + omega_r * r - (tau0 + eps1 * u1 + mu) * i
    dl2 = (1 - phi) * delta * l1 - sigma * foi * l2 - (omega + eps2 * u2 + tau2 + mu) * l2
    dr = (
        (tau0 + eps1 * u1) * i
        + tau1 * l1
        + (tau2 + eps2 * u2) * l2
        - sigma_r * foi * r
        - (omega_r + mu) * r
    )
    return ds, dl1, di, dl2, dr


@njit(cache=True)
def costate_rhs(lam, s, l1, i, l2, r, u1, u2, p, l2_in_cost):
    beta, mu, delta, phi = p[0], p[1], p[2], p[3]
    omega, omega_r, sigma, sigma_r = p[4], p[5], p[6], p[7]
    tau0, tau1, tau2, eps1, eps2, ntot = p[8], p[9], p[10], p[11], p[12], p[13]
    m1, m2, m3, m4, m5 = lam[0], lam[1], lam[2], lam[3], lam[4]
    foi = beta * i / ntot
    d1 = m1 * (foi + mu) - m2 * foi
    d2 = m2 * (delta + tau1 + mu) - m3 * phi * delta - m4 * (1 - phi) * delta - m5 * tau1
    d3 = (
        -1.0
        + m1 * beta * s / ntot
        - m2 * beta * (s + sigma * l2 + sigma_r * r) / ntot
        + m3 * (tau0 + eps1 * u1 + mu)
        + m4 * sigma * beta * l2 / ntot
        - m5 * (tau0 + eps1 * u1 - sigma_r * beta * r / ntot)
    )
    src4 = -1.0 if l2_in_cost else 0.0
    d4 = (
        src4
        - m2 * foi * sigma
        - m3 * omega
        + m4 * (sigma * foi + omega + eps2 * u2 + tau2 + mu)
        - m5 * (tau2 + eps2 * u2)
    )
    d5 = -m2 * sigma_r * foi - m3 * omega_r + m5 * (sigma_r * foi + omega_r + mu)
    return d1, d2, d3, d4, d5


@njit(cache=True)
def forward_sweep(y0, h, n, u, p):
    out = np.empty((n + 1, 5))
    y = y0.copy()
    out[0] = y
    for j in range(n):
        u1a, u2a = u[j, 0], u[j, 1]
        u1b, u2b = u[j + 1, 0], u[j + 1, 1]
        u1m, u2m = 0.5 * (u1a + u1b), 0.5 * (u2a + u2b)
        k1 = state_rhs(y[0], y[1], y[2], y[3], y[4], u1a, u2a, p)
        k2 = state_rhs(
            y[0] + 0.5 * h * k1[0],
            y[1] + 0.5 * h * k1[1],
            y[2] + 0.5 * h * k1[2],
            y[3] + 0.5 * h * k1[3],
            y[4] + 0.5 * h * k1[4],
            u1m, u2m, p,
        )
        k3 = state_rhs(
            y[0] + 0.5 * h * k2[0],
            y[1] + 0.5 * h * k2[1],
            y[2] + 0.5 * h * k2[2],
            y[3] + 0.5 * h * k2[3],
            y[4] + 0.5 * h * k2[4],
            u1m, u2m, p,
        )
        k4 = state_rhs(
            y[0] + h * k3[0],
            y[1] + h * k3[1],
            y[2] + h * k3[2],
            y[3] + h * k3[3],
            y[4] + h * k3[4],
            u1b, u2b, p,
        )
        ok = True
        for m in range(5):
            y[m] = y[m] + (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
            if not np.isfinite(y[m]):
                ok = False
        if not ok:
            return out, j + 1
        out[j + 1] = y
    return out, -1


@njit(cache=True)
def backward_sweep(lam_t, h, n, ys, u, p, l2_in_cost):
    out = np.empty((n + 1, 5))
    lam = lam_t.copy()
    out[n] = lam
    tmp = np.empty(5)
    for j in range(n, 0, -1):
        ya = ys[j]
        yb = ys[j - 1]
        u1a, u2a = u[j, 0], u[j, 1]
        u1b, u2b = u[j - 1, 0], u[j - 1, 1]
        sm = 0.5 * (ya[0] + yb[0])
        l1m = 0.5 * (ya[1] + yb[1])
        im = 0.5 * (ya[2] + yb[2])
        l2m = 0.5 * (ya[3] + yb[3])
        rm = 0.5 * (ya[4] + yb[4])
        u1m, u2m = 0.5 * (u1a + u1b), 0.5 * (u2a + u2b)
        k1 = costate_rhs(lam, ya[0], ya[1], ya[2], ya[3], ya[4], u1a, u2a, p, l2_in_cost)
        for m in range(5):
            tmp[m] = lam[m] - 0.5 * h * k1[m]
        k2 = costate_rhs(tmp, sm, l1m, im, l2m, rm, u1m, u2m, p, l2_in_cost)
        for m in range(5):
            tmp[m] = lam[m] - 0.5 * h * k2[m]
        k3 = costate_rhs(tmp, sm, l1m, im, l2m, rm, u1m, u2m, p, l2_in_cost)
        for m in range(5):
            tmp[m] = lam[m] - h * k3[m]
        k4 = costate_rhs(tmp, yb[0], yb[1], yb[2], yb[3], yb[4], u1b, u2b, p, l2_in_cost)
        ok = True
        for m in range(5):
            lam[m] = lam[m] - (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
            if not np.isfinite(lam[m]):
                ok = False
        if not ok:
            return out, j - 1
        out[j - 1] = lam
    return out, -1
