# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: DOP853 stepping of the phase-space flow and adaptive
Gauss-Kronrod quadrature of the theta-substituted hyperelliptic integrand.

Call-compatible with ``_purekernels``.
"""

import numpy as np

from libc.math cimport fabs, sqrt, sin, cos, pow, nextafter, INFINITY, M_PI
from libc.stdlib cimport malloc, free

from . import _tables as T

NAME = "cython"

cdef enum:
    NS = 12
    NE = 16
    NP = 7
    NEQ = 4

cdef double _A[NE][NE]
cdef double _B[NS]
cdef double _E3[NS + 1]
cdef double _E5[NS + 1]
cdef double _D[NP - 3][NE]
cdef double _XK[15]
cdef double _WK[15]
cdef double _WG[15]
cdef double _SAFETY = T.SAFETY
cdef double _MINF = T.MIN_FACTOR
cdef double _MAXF = T.MAX_FACTOR
cdef double _EXPO = T.ERROR_EXPONENT


def _load_tables():
    cdef int i, j
    for i in range(NE):
        for j in range(NE):
            _A[i][j] = T.DOP_A[i, j]
    for i in range(NS):
        _B[i] = T.DOP_B[i]
    for i in range(NS + 1):
        _E3[i] = T.DOP_E3[i]
        _E5[i] = T.DOP_E5[i]
    for i in range(NP - 3):
        for j in range(NE):
            _D[i][j] = T.DOP_D[i, j]
    for i in range(15):
        _XK[i] = T.GK15_NODES[i]
        _WK[i] = T.GK15_KWEIGHTS[i]
        _WG[i] = T.GK15_GWEIGHTS[i]


_load_tables()

cdef enum:
    ST_OK = 0
    ST_UNDERFLOW = 1
    ST_MAX_STEPS = 2

STATUS_OK = ST_OK
STATUS_UNDERFLOW = ST_UNDERFLOW
STATUS_MAX_STEPS = ST_MAX_STEPS


cdef inline void _field(const double* s, double* out) noexcept nogil:
    cdef double a = s[0]
    cdef double b = s[1]
    cdef double r = 2.0 * a * a + 8.0 * b * b
    out[0] = s[2]
    out[1] = s[3]
    out[2] = (1.0 - r) * a
    out[3] = (4.0 - r) * b


cdef void _stage_state(const double* y, double K[NE][NEQ], int s, double h,
                       double* out) noexcept nogil:
    cdef int j, e
    cdef double acc
    for e in range(NEQ):
        acc = 0.0
        for j in range(s):
            acc += K[j][e] * _A[s][j]
        out[e] = y[e] + h * acc


cdef double _try_step(const double* y, const double* f, double h,
                      double rtol, double atol, double K[NE][NEQ],
                      double* y_new) noexcept nogil:
    """One DOP853 attempt; fills K[0..NS] and y_new, returns the error norm."""
    cdef int s, e, j
    cdef double tmp[NEQ]
    cdef double acc, sc, e5, e3, v5, v3, denom
    for e in range(NEQ):
        K[0][e] = f[e]
    for s in range(1, NS):
        _stage_state(y, K, s, h, tmp)
        _field(tmp, K[s])
    for e in range(NEQ):
        acc = 0.0
        for j in range(NS):
            acc += K[j][e] * _B[j]
        y_new[e] = y[e] + h * acc
    _field(y_new, K[NS])
    e5 = 0.0
    e3 = 0.0
    for e in range(NEQ):
        sc = atol + rtol * (fabs(y[e]) if fabs(y[e]) > fabs(y_new[e]) else fabs(y_new[e]))
        v5 = 0.0
        v3 = 0.0
        for j in range(NS + 1):
            v5 += K[j][e] * _E5[j]
            v3 += K[j][e] * _E3[j]
        v5 /= sc
        v3 /= sc
        e5 += v5 * v5
        e3 += v3 * v3
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    denom = e5 + 0.01 * e3
    return fabs(h) * e5 / sqrt(denom * NEQ)


cdef void _dense(const double* y_old, const double* y_new, double h,
                 double K[NE][NEQ], double* F) noexcept nogil:
    """Write the NP x NEQ interpolation block for the accepted step into F."""
    cdef int s, e, i, j
    cdef double tmp[NEQ]
    cdef double delta, acc
    for s in range(NS + 1, NE):
        _stage_state(y_old, K, s, h, tmp)
        _field(tmp, K[s])
    for e in range(NEQ):
        delta = y_new[e] - y_old[e]
        F[0 * NEQ + e] = delta
        F[1 * NEQ + e] = h * K[0][e] - delta
        F[2 * NEQ + e] = 2.0 * delta - h * (K[NS][e] + K[0][e])
        for i in range(NP - 3):
            acc = 0.0
            for j in range(NE):
                acc += _D[i][j] * K[j][e]
            F[(3 + i) * NEQ + e] = h * acc


def dop853(state0, double y0, double y_end, double rtol, double atol,
           double h0, long max_steps):
    """Integrate the vector field from ``y0`` to ``y_end``.

    Returns ``(ys, states, dense, n_rejected, status, y_stop)``.
    """
    cdef double K[NE][NEQ]
    cdef double y[NEQ]
    cdef double f[NEQ]
    cdef double y_new[NEQ]
    cdef double t = y0, t_new, h, h_abs = fabs(h0), err, factor, min_step
    cdef double direction = 1.0 if y_end >= y0 else -1.0
    cdef long n = 0, cap = 1024, n_rej = 0
    cdef int status = ST_OK, e
    cdef bint rejected

    for e in range(NEQ):
        y[e] = state0[e]
    _field(y, f)

    ts_arr = np.empty(cap + 1)
    st_arr = np.empty((cap + 1, NEQ))
    de_arr = np.empty((cap, NP, NEQ))
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] st = st_arr
    cdef double[:, :, ::1] de = de_arr
    ts[0] = t
    for e in range(NEQ):
        st[0, e] = y[e]

    while direction * (t - y_end) < 0.0:
        if n >= max_steps:
            status = ST_MAX_STEPS
            break
        if n >= cap:
            cap *= 2
            ts_arr = np.resize(ts_arr, cap + 1)
            st_arr = np.resize(st_arr, (cap + 1, NEQ))
            de_arr = np.resize(de_arr, (cap, NP, NEQ))
            ts = ts_arr
            st = st_arr
            de = de_arr
        with nogil:
            min_step = 10.0 * fabs(nextafter(t, direction * INFINITY) - t)
            if h_abs < min_step:
                h_abs = min_step
            rejected = False
            while True:
                if h_abs < min_step:
                    status = ST_UNDERFLOW
                    break
                t_new = t + direction * h_abs
                if direction * (t_new - y_end) > 0.0:
                    t_new = y_end
                h = t_new - t
                h_abs = fabs(h)
                err = _try_step(y, f, h, rtol, atol, K, y_new)
                if err < 1.0:
                    if err == 0.0:
                        factor = _MAXF
                    else:
                        factor = _SAFETY * pow(err, _EXPO)
                        if factor > _MAXF:
                            factor = _MAXF
                    if rejected and factor > 1.0:
                        factor = 1.0
                    h_abs *= factor
                    break
                factor = _SAFETY * pow(err, _EXPO)
                if factor < _MINF:
                    factor = _MINF
                h_abs *= factor
                rejected = True
                n_rej += 1
            if status == ST_OK:
                _dense(y, y_new, h, K, &de[n, 0, 0])
                t = t_new
                for e in range(NEQ):
                    y[e] = y_new[e]
                    f[e] = K[NS][e]
                n += 1
                ts[n] = t
                for e in range(NEQ):
                    st[n, e] = y[e]
        if status != ST_OK:
            break

    return (ts_arr[:n + 1].copy(), st_arr[:n + 1].copy(), de_arr[:n].copy(),
            n_rej, status, t)


# -- hyperelliptic quadrature ------------------------------------------------

cdef inline double _integrand(double theta, double width, const double* dlo,
                              const double* dhi, int nr, double lead,
                              double lo, int power) noexcept nogil:
    cdef double sn = sin(theta)
    cdef double cs = cos(theta)
    cdef double sn2 = sn * sn, cs2 = cs * cs
    cdef double g = lead
    cdef int i
    if theta < 0.25 * M_PI:
        for i in range(nr):
            g *= fabs(dlo[i] + width * sn2)
    else:
        for i in range(nr):
            g *= fabs(dhi[i] - width * cs2)
    cdef double val = 2.0 / sqrt(g)
    if power == 1:
        val *= lo + width * sn2
    elif power > 1:
        val *= pow(lo + width * sn2, power)
    return val


cdef void _gk(double a, double b, double width, const double* dlo,
              const double* dhi, int nr, double lead, double lo, int power,
              double* val, double* err) noexcept nogil:
    cdef double c = 0.5 * (a + b), r = 0.5 * (b - a), fx, k = 0.0, g = 0.0
    cdef int i
    for i in range(15):
        fx = _integrand(c + r * _XK[i], width, dlo, dhi, nr, lead, lo, power)
        k += _WK[i] * fx
        g += _WG[i] * fx
    val[0] = r * k
    err[0] = fabs(r * (k - g))


def hyperelliptic_quad(double width, dlo_in, dhi_in, double lead, double lo,
                       int power, double rtol, double atol, int max_intervals):
    """Globally adaptive GK15 over theta in [0, pi/2].

    Returns ``(value, error, mesh)``.
    """
    cdef double[::1] dlo = np.ascontiguousarray(dlo_in, dtype=float)
    cdef double[::1] dhi = np.ascontiguousarray(dhi_in, dtype=float)
    cdef int nr = dlo.shape[0]
    cdef double* sa = <double*> malloc(max_intervals * sizeof(double))
    cdef double* sb = <double*> malloc(max_intervals * sizeof(double))
    cdef double* sv = <double*> malloc(max_intervals * sizeof(double))
    cdef double* se = <double*> malloc(max_intervals * sizeof(double))
    cdef int n = 1, i, worst
    cdef double total, err, m, emax
    cdef const double* pl = &dlo[0] if nr > 0 else NULL
    cdef const double* ph = &dhi[0] if nr > 0 else NULL
    if sa == NULL or sb == NULL or sv == NULL or se == NULL:
        free(sa); free(sb); free(sv); free(se)
        raise MemoryError()
    try:
        with nogil:
            sa[0] = 0.0
            sb[0] = 0.5 * M_PI
            _gk(sa[0], sb[0], width, pl, ph, nr, lead, lo, power, &sv[0], &se[0])
            total = sv[0]
            err = se[0]
            while err > (atol if atol > rtol * fabs(total) else rtol * fabs(total)) \
                    and n < max_intervals:
                worst = 0
                emax = se[0]
                for i in range(1, n):
                    if se[i] > emax:
                        emax = se[i]
                        worst = i
                m = 0.5 * (sa[worst] + sb[worst])
                sa[n] = m
                sb[n] = sb[worst]
                sb[worst] = m
                _gk(sa[worst], sb[worst], width, pl, ph, nr, lead, lo, power,
                    &sv[worst], &se[worst])
                _gk(sa[n], sb[n], width, pl, ph, nr, lead, lo, power,
                    &sv[n], &se[n])
                n += 1
                total = 0.0
                err = 0.0
                for i in range(n):
                    total += sv[i]
                    err += se[i]
        mesh = np.empty(n + 1)
        for i in range(n):
            mesh[i] = sa[i]
        mesh[n] = 0.5 * M_PI
        mesh.sort()
        return total, err, mesh
    finally:
        free(sa); free(sb); free(sv); free(se)


def hyperelliptic_fixed(double width, dlo_in, dhi_in, double lead, double lo,
                        int power, mesh_in):
    """Apply GK15 on each cell of a prescribed mesh."""
    cdef double[::1] dlo = np.ascontiguousarray(dlo_in, dtype=float)
    cdef double[::1] dhi = np.ascontiguousarray(dhi_in, dtype=float)
    cdef double[::1] mesh = np.ascontiguousarray(mesh_in, dtype=float)
    cdef int nr = dlo.shape[0], i
    cdef double total = 0.0, err = 0.0, v, e
    cdef const double* pl = &dlo[0] if nr > 0 else NULL
    cdef const double* ph = &dhi[0] if nr > 0 else NULL
    with nogil:
        for i in range(mesh.shape[0] - 1):
            _gk(mesh[i], mesh[i + 1], width, pl, ph, nr, lead, lo, power, &v, &e)
            total += v
            err += e
    return total, err
