"""Pure-Python (NumPy) implementation of the hot kernels.

Mirrors ``_kernels.pyx`` call for call; used when the compiled extension is
unavailable or when ``KEXT_PURE_PYTHON`` is set.
"""

import math

import numpy as np

from . import _tables as T

NAME = "python"

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


def field(s):
    a, b, c, d = s
    r = 2.0 * a * a + 8.0 * b * b
    return np.array([c, d, (1.0 - r) * a, (4.0 - r) * b])


def _rk_step(t, y, f, h, K):
    K[0] = f
    for s in range(1, T.DOP_N_STAGES):
        dy = K[:s].T @ T.DOP_A[s, :s] * h
        K[s] = field(y + dy)
    y_new = y + h * (K[:T.DOP_N_STAGES].T @ T.DOP_B)
    f_new = field(y_new)
    K[T.DOP_N_STAGES] = f_new
    return y_new, f_new


def _error_norm(K, h, scale):
    nk = T.DOP_N_STAGES + 1
    err5 = (K[:nk].T @ T.DOP_E5) / scale
    err3 = (K[:nk].T @ T.DOP_E3) / scale
    e5 = float(err5 @ err5)
    e3 = float(err3 @ err3)
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    denom = e5 + 0.01 * e3
    return abs(h) * e5 / math.sqrt(denom * 4.0)


def _dense(t_old, y_old, y_new, f_new, h, K):
    for j, s in enumerate(range(T.DOP_N_STAGES + 1, T.DOP_N_EXTENDED)):
        dy = K[:s].T @ T.DOP_A[s, :s] * h
        K[s] = field(y_old + dy)
    F = np.empty((T.DOP_POWER, 4))
    f_old = K[0]
    delta = y_new - y_old
    F[0] = delta
    F[1] = h * f_old - delta
    F[2] = 2.0 * delta - h * (f_new + f_old)
    F[3:] = h * (T.DOP_D @ K)
    return F


def dop853(state0, y0, y_end, rtol, atol, h0, max_steps):
    """Integrate the vector field from ``y0`` to ``y_end``.

    Returns ``(ys, states, dense, n_rejected, status, y_stop)`` where
    ``dense[i]`` holds the 7 interpolation vectors of step ``i``.
    """
    y = np.array(state0, dtype=float)
    t = float(y0)
    direction = 1.0 if y_end >= y0 else -1.0
    h_abs = abs(h0)
    f = field(y)
    K = np.empty((T.DOP_N_EXTENDED, 4))

    ts = [t]
    ys = [y.copy()]
    dense = []
    n_rej = 0
    status = STATUS_OK

    while direction * (t - y_end) < 0.0:
        if len(dense) >= max_steps:
            status = STATUS_MAX_STEPS
            break
        min_step = 10.0 * abs(np.nextafter(t, direction * np.inf) - t)
        if h_abs < min_step:
            h_abs = min_step
        rejected = False
        while True:
            if h_abs < min_step:
                status = STATUS_UNDERFLOW
                break
            t_new = t + direction * h_abs
            if direction * (t_new - y_end) > 0.0:
                t_new = y_end
            h = t_new - t
            h_abs = abs(h)
            y_new, f_new = _rk_step(t, y, f, h, K)
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            err = _error_norm(K, h, scale)
            if err < 1.0:
                if err == 0.0:
                    factor = T.MAX_FACTOR
                else:
                    factor = min(T.MAX_FACTOR, T.SAFETY * err ** T.ERROR_EXPONENT)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            h_abs *= max(T.MIN_FACTOR, T.SAFETY * err ** T.ERROR_EXPONENT)
            rejected = True
            n_rej += 1
        if status != STATUS_OK:
            break
        dense.append(_dense(t, y, y_new, f_new, h, K))
        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())

    dense_arr = np.array(dense) if dense else np.empty((0, T.DOP_POWER, 4))
    return np.array(ts), np.array(ys), dense_arr, n_rej, status, t


# -- hyperelliptic quadrature ------------------------------------------------

def _integrand(theta, width, dlo, dhi, lead, lo, power):
    sn2 = np.sin(theta) ** 2
    cs2 = np.cos(theta) ** 2
    low = theta < 0.25 * np.pi
    g = np.full(theta.shape, lead)
    for a, b in zip(dlo, dhi):
        g = g * np.abs(np.where(low, a + width * sn2, b - width * cs2))
    val = 2.0 / np.sqrt(g)
    if power:
        val = val * (lo + width * sn2) ** power
    return val


def _gk(a, b, args):
    c = 0.5 * (a + b)
    r = 0.5 * (b - a)
    fx = _integrand(c + r * T.GK15_NODES, *args)
    k = r * float(fx @ T.GK15_KWEIGHTS)
    g = r * float(fx @ T.GK15_GWEIGHTS)
    return k, abs(k - g)


def hyperelliptic_quad(width, dlo, dhi, lead, lo, power, rtol, atol,
                       max_intervals):
    """Globally adaptive GK15 over theta in [0, pi/2].

    Returns ``(value, error, mesh)`` with ``mesh`` the sorted breakpoints of
    the final partition.
    """
    args = (width, np.asarray(dlo, float), np.asarray(dhi, float), lead, lo,
            power)
    a0, b0 = 0.0, 0.5 * np.pi
    v, e = _gk(a0, b0, args)
    segs = [[a0, b0, v, e]]
    total, err = v, e
    while err > max(atol, rtol * abs(total)) and len(segs) < max_intervals:
        i = max(range(len(segs)), key=lambda j: segs[j][3])
        a, b, _, _ = segs[i]
        m = 0.5 * (a + b)
        v1, e1 = _gk(a, m, args)
        v2, e2 = _gk(m, b, args)
        segs[i] = [a, m, v1, e1]
        segs.append([m, b, v2, e2])
        total = math.fsum(s[2] for s in segs)
        err = math.fsum(s[3] for s in segs)
    mesh = np.array(sorted([s[0] for s in segs] + [b0]))
    return total, err, mesh


def hyperelliptic_fixed(width, dlo, dhi, lead, lo, power, mesh):
    """Apply GK15 on each cell of a prescribed ``mesh``."""
    args = (width, np.asarray(dlo, float), np.asarray(dhi, float), lead, lo,
            power)
    vals = []
    errs = []
    for a, b in zip(mesh[:-1], mesh[1:]):
        v, e = _gk(a, b, args)
        vals.append(v)
        errs.append(e)
    return math.fsum(vals), math.fsum(errs)
