"""Compiled right-hand sides, diagnostics and the fixed-step RK4 loop.

Everything here works on the flat state layout documented in ``state.py``.
The Python-facing wrappers live in ``dynamics``, ``control`` and ``simulation``.
"""

import math

import numpy as np
from numba import njit

MODE_CLOSED = 0
MODE_OPEN_TRUNCATED = 1
MODE_OPEN_FULL = 2

FLAVOR_CONSISTENT = 0
FLAVOR_PAPER_EXACT = 1

TORQUE_EXTERNAL = 0
TORQUE_FEEDBACK = 1

# summary accumulator slots
ACC_MAX_RESIDUAL = 0
ACC_MAX_DRIFT = 1
ACC_MAX_V_INCREASE = 2
ACC_MIN_V = 3
ACC_MAX_V = 4
ACC_MAX_U = 5  # 5, 6, 7
ACC_SUP_Y = 8
ACC_SUP_DIST = 9
ACC_LAST_V = 10
ACC_SIZE = 11


@njit(cache=True)
def gammas(x, n, b):
    g1 = 0.0
    g2 = 0.0
    g3 = 0.0
    for k in range(n):
        a1 = x[k]
        p1 = x[n + k]
        a2 = x[2 * n + k]
        p2 = x[3 * n + k]
        g1 += b[k] * p2
        g2 -= b[k] * p1
        g3 += a2 * p1 - a1 * p2
    return g1, g2, g3


@njit(cache=True)
def feedback(x, n, b, inertia, omega0, nu, out):
    g1, g2, g3 = gammas(x, n, b)
    w1 = x[4 * n]
    w2 = x[4 * n + 1]
    w3 = x[4 * n + 2]
    q1 = x[4 * n + 3]
    q2 = x[4 * n + 4]
    q3 = x[4 * n + 5]
    q4 = x[4 * n + 6]
    I1 = inertia[0]
    I2 = inertia[1]
    I3 = inertia[2]
    w0sq = omega0 * omega0
    tilt = 2.0 * q1 * q1 + 2.0 * q2 * q2 - 1.0
    out[0] = (-nu[0] * I1 * g1 + (I1 - I2 + I3) * w2 * w3
              + 6.0 * w0sq * (I3 - I2) * (q1 * q4 + q2 * q3) * tilt)
    out[1] = (-nu[1] * I2 * g2 + (I1 - I2 - I3) * w1 * w3
              + 6.0 * w0sq * (I1 - I3) * (q1 * q3 - q2 * q4) * tilt)
    out[2] = (-nu[2] * I3 * g3 + (I2 - I1) * w1 * w2
              + 12.0 * w0sq * (I2 - I1) * (q1 * q4 + q2 * q3) * (q2 * q4 - q1 * q3))


@njit(cache=True)
def gravity(x, n, inertia, omega0, out):
    q1 = x[4 * n + 3]
    q2 = x[4 * n + 4]
    q3 = x[4 * n + 5]
    q4 = x[4 * n + 6]
    k1 = 2.0 * (q1 * q3 - q2 * q4)
    k2 = 2.0 * (q2 * q3 + q1 * q4)
    k3 = q3 * q3 + q4 * q4 - q1 * q1 - q2 * q2
    c = 3.0 * omega0 * omega0
    out[0] = c * (inertia[2] - inertia[1]) * k2 * k3
    out[1] = c * (inertia[0] - inertia[2]) * k1 * k3
    out[2] = c * (inertia[1] - inertia[0]) * k1 * k2


@njit(cache=True)
def quaternion_rows(x, n, omega0, flavor, out):
    w1 = x[4 * n]
    w2 = x[4 * n + 1]
    w3 = x[4 * n + 2]
    q1 = x[4 * n + 3]
    q2 = x[4 * n + 4]
    q3 = x[4 * n + 5]
    q4 = x[4 * n + 6]
    o = 4 * n + 3
    if flavor == FLAVOR_CONSISTENT:
        r1 = w1 + omega0 * (q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4)
        r2 = w2 + omega0 * 2.0 * (q1 * q2 - q3 * q4)
        r3 = w3 + omega0 * 2.0 * (q1 * q3 + q2 * q4)
        out[o] = 0.5 * (q4 * r1 + q2 * r3 - q3 * r2)
        out[o + 1] = 0.5 * (q4 * r2 + q3 * r1 - q1 * r3)
        out[o + 2] = 0.5 * (q4 * r3 + q1 * r2 - q2 * r1)
        out[o + 3] = -0.5 * (q1 * r1 + q2 * r2 + q3 * r3)
    else:
        out[o] = 0.5 * (w3 * q2 - w2 * q3 + (w1 + omega0) * q4)
        out[o + 1] = 0.5 * ((w1 - omega0) * q3 - w3 * q1 + w2 * q4)
        out[o + 2] = 0.5 * (w2 * q1 - (w1 - omega0) * q2 + w3 * q4)
        out[o + 3] = -0.5 * (q1 * (w1 + omega0) + q2 * w2 + q3 * w3)


@njit(cache=True)
def rhs(x, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy, u_ext, u, out):
    """Fill ``out`` with the state derivative; ``u`` receives the torque used.

    In closed-loop mode ``u`` is the feedback torque the closed loop embodies.
    """
    w1 = x[4 * n]
    w2 = x[4 * n + 1]
    w3 = x[4 * n + 2]
    if mode == MODE_CLOSED or torque_policy == TORQUE_FEEDBACK:
        feedback(x, n, b, inertia, omega0, nu, u)
    else:
        u[0] = u_ext[0]
        u[1] = u_ext[1]
        u[2] = u_ext[2]

    if mode == MODE_CLOSED:
        g1, g2, g3 = gammas(x, n, b)
        wd1 = w2 * w3 - nu[0] * g1
        wd2 = -w1 * w3 - nu[1] * g2
        wd3 = -nu[2] * g3
        for k in range(n):
            a1 = x[k]
            p1 = x[n + k]
            a2 = x[2 * n + k]
            p2 = x[3 * n + k]
            s1 = 0.0
            s2 = 0.0
            for j in range(n):
                s1 += stiff[k, j] * x[j]
                s2 += stiff[k, j] * x[2 * n + j]
            out[k] = p1
            out[n + k] = -s1 + 2.0 * w3 * p2 + nu[1] * b[k] * g2 - nu[2] * g3 * a2
            out[2 * n + k] = p2
            out[3 * n + k] = -s2 - 2.0 * w3 * p1 - nu[0] * b[k] * g1 + nu[2] * g3 * a1
    else:
        q1 = x[4 * n + 3]
        q2 = x[4 * n + 4]
        q3 = x[4 * n + 5]
        q4 = x[4 * n + 6]
        I1 = inertia[0]
        I2 = inertia[1]
        I3 = inertia[2]
        w0sq = omega0 * omega0
        tilt = 2.0 * q1 * q1 + 2.0 * q2 * q2 - 1.0
        wd1 = ((I2 - I3) / I1 * w2 * w3
               + 6.0 * w0sq * (I2 - I3) / I1 * (q1 * q4 + q2 * q3) * tilt + u[0] / I1)
        wd2 = ((I3 - I1) / I2 * w1 * w3
               + 6.0 * w0sq * (I3 - I1) / I2 * (q1 * q3 - q2 * q4) * tilt + u[1] / I2)
        wd3 = ((I1 - I2) / I3 * w1 * w2
               + 12.0 * w0sq * (I1 - I2) / I3 * (q1 * q4 + q2 * q3) * (q2 * q4 - q1 * q3)
               + u[2] / I3)
        shear1 = wd2 + w1 * w3
        shear2 = wd1 - w2 * w3
        if mode == MODE_OPEN_FULL:
            c11 = w2 * w2 + w3 * w3
            c12 = wd3 - w1 * w2
            c21 = -(wd3 + w1 * w2)
            c22 = w1 * w1 + w3 * w3
        else:
            c11 = 0.0
            c12 = wd3
            c21 = -wd3
            c22 = 0.0
        for k in range(n):
            a1 = x[k]
            p1 = x[n + k]
            a2 = x[2 * n + k]
            p2 = x[3 * n + k]
            s1 = 0.0
            s2 = 0.0
            for j in range(n):
                s1 += stiff[k, j] * x[j]
                s2 += stiff[k, j] * x[2 * n + j]
            out[k] = p1
            out[n + k] = -s1 + c11 * a1 + c12 * a2 - shear1 * b[k] + 2.0 * w3 * p2
            out[2 * n + k] = p2
            out[3 * n + k] = -s2 + c22 * a2 + c21 * a1 + shear2 * b[k] - 2.0 * w3 * p1
    out[4 * n] = wd1
    out[4 * n + 1] = wd2
    out[4 * n + 2] = wd3
    quaternion_rows(x, n, omega0, flavor, out)


@njit(cache=True)
def energy(x, n, stiff):
    v = 0.0
    for k in range(n):
        p1 = x[n + k]
        p2 = x[3 * n + k]
        s1 = 0.0
        s2 = 0.0
        for j in range(n):
            s1 += stiff[k, j] * x[j]
            s2 += stiff[k, j] * x[2 * n + j]
        v += p1 * p1 + p2 * p2 + x[k] * s1 + x[2 * n + k] * s2
    return 0.5 * v


@njit(cache=True)
def energy_rate(x, xd, n, stiff):
    """Directional derivative of the beam energy along ``xd``."""
    vd = 0.0
    for k in range(n):
        s1 = 0.0
        s2 = 0.0
        for j in range(n):
            s1 += stiff[k, j] * x[j]
            s2 += stiff[k, j] * x[2 * n + j]
        vd += x[n + k] * xd[n + k] + x[3 * n + k] * xd[3 * n + k] + s1 * xd[k] + s2 * xd[2 * n + k]
    return vd


@njit(cache=True)
def decay_residual(x, xd, n, stiff, b, nu):
    g1, g2, g3 = gammas(x, n, b)
    return energy_rate(x, xd, n, stiff) + nu[0] * g1 * g1 + nu[1] * g2 * g2 + nu[2] * g3 * g3


@njit(cache=True)
def quad_norm(a, off, n, mat):
    s = 0.0
    for k in range(n):
        t = 0.0
        for j in range(n):
            t += mat[k, j] * a[off + j]
        s += a[off + k] * t
    return math.sqrt(max(s, 0.0))


@njit(cache=True)
def y_value(x, n, h2):
    s1 = 0.0
    s2 = 0.0
    for k in range(n):
        s1 += x[n + k] * x[n + k]
        s2 += x[3 * n + k] * x[3 * n + k]
    return quad_norm(x, 0, n, h2) + quad_norm(x, 2 * n, n, h2) + math.sqrt(s1) + math.sqrt(s2)


@njit(cache=True)
def dist_x(x, ref, n, gram2, rhoA, EI, inertia, kappa):
    d = x - ref
    s = 0.0
    for k in range(n):
        s += rhoA * (d[n + k] * d[n + k] + d[3 * n + k] * d[3 * n + k])
    c1 = quad_norm(d, 0, n, gram2)
    c2 = quad_norm(d, 2 * n, n, gram2)
    s += EI * (c1 * c1 + c2 * c2)
    for i in range(3):
        s += inertia[i] * d[4 * n + i] * d[4 * n + i]
    for i in range(4):
        s += kappa * d[4 * n + 3 + i] * d[4 * n + 3 + i]
    return math.sqrt(s)


@njit(cache=True)
def _accumulate(x, xd, u, n, stiff, b, nu, h2, gram2, ref, rhoA, EI, inertia, kappa, drift, acc, first):
    v = energy(x, n, stiff)
    res = decay_residual(x, xd, n, stiff, b, nu)
    if first:
        acc[ACC_MAX_RESIDUAL] = abs(res)
        acc[ACC_MAX_DRIFT] = abs(drift)
        acc[ACC_MAX_V_INCREASE] = -np.inf
        acc[ACC_MIN_V] = v
        acc[ACC_MAX_V] = v
        for i in range(3):
            acc[ACC_MAX_U + i] = abs(u[i])
        acc[ACC_SUP_Y] = y_value(x, n, h2)
        acc[ACC_SUP_DIST] = dist_x(x, ref, n, gram2, rhoA, EI, inertia, kappa)
    else:
        acc[ACC_MAX_RESIDUAL] = max(acc[ACC_MAX_RESIDUAL], abs(res))
        acc[ACC_MAX_DRIFT] = max(acc[ACC_MAX_DRIFT], abs(drift))
        acc[ACC_MAX_V_INCREASE] = max(acc[ACC_MAX_V_INCREASE], v - acc[ACC_LAST_V])
        acc[ACC_MIN_V] = min(acc[ACC_MIN_V], v)
        acc[ACC_MAX_V] = max(acc[ACC_MAX_V], v)
        for i in range(3):
            acc[ACC_MAX_U + i] = max(acc[ACC_MAX_U + i], abs(u[i]))
        acc[ACC_SUP_Y] = max(acc[ACC_SUP_Y], y_value(x, n, h2))
        acc[ACC_SUP_DIST] = max(acc[ACC_SUP_DIST],
                                dist_x(x, ref, n, gram2, rhoA, EI, inertia, kappa))
    acc[ACC_LAST_V] = v


@njit(cache=True)
def rk4_step(x, k1, dt, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy,
             u_ext, renormalize, out):
    """One classical RK4 step from ``x`` given ``k1 = f(x)``; returns the q drift."""
    m = x.shape[0]
    u = np.empty(3)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    for i in range(m):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    rhs(tmp, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy, u_ext, u, k2)
    for i in range(m):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    rhs(tmp, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy, u_ext, u, k3)
    for i in range(m):
        tmp[i] = x[i] + dt * k3[i]
    rhs(tmp, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy, u_ext, u, k4)
    for i in range(m):
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    o = 4 * n + 3
    qn = math.sqrt(out[o] ** 2 + out[o + 1] ** 2 + out[o + 2] ** 2 + out[o + 3] ** 2)
    if renormalize and qn > 0.0:
        for i in range(4):
            out[o + i] /= qn
    return qn - 1.0


@njit(cache=True)
def advance(x, k1, u, nsteps, dt, n, stiff, b, inertia, omega0, nu, mode, flavor,
            torque_policy, u_ext, renormalize, h2, gram2, ref, rhoA, EI, kappa, acc):
    """Take ``nsteps`` steps in place, folding per-step diagnostics into ``acc``.

    ``k1`` and ``u`` must hold ``f(x)`` and the torque at ``x`` on entry and are
    updated to match the final state. Returns ``(last_drift, failed_step)``
    where ``failed_step`` is -1 on success.
    """
    m = x.shape[0]
    nxt = np.empty(m)
    drift = 0.0
    for s in range(nsteps):
        drift = rk4_step(x, k1, dt, n, stiff, b, inertia, omega0, nu, mode, flavor,
                         torque_policy, u_ext, renormalize, nxt)
        for i in range(m):
            if not math.isfinite(nxt[i]):
                return drift, s
        for i in range(m):
            x[i] = nxt[i]
        rhs(x, n, stiff, b, inertia, omega0, nu, mode, flavor, torque_policy, u_ext, u, k1)
        _accumulate(x, k1, u, n, stiff, b, nu, h2, gram2, ref, rhoA, EI, inertia, kappa,
                    drift, acc, False)
    return drift, -1


@njit(cache=True)
def initial_accumulate(x, k1, u, n, stiff, b, nu, h2, gram2, ref, rhoA, EI, inertia, kappa, acc):
    _accumulate(x, k1, u, n, stiff, b, nu, h2, gram2, ref, rhoA, EI, inertia, kappa, 0.0, acc, True)
