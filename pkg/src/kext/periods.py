"""Hyperelliptic periods of the separated coordinates.

Both periods have the form ``2 int_lo^hi ds / sqrt(P(s))`` between two
adjacent simple roots of the quintic.  The substitution
``s = lo + (hi - lo) sin^2(theta)`` cancels the endpoint singularities and
leaves the analytic integrand

    2 / sqrt(8 prod_r |s(theta) - r|)

over the three remaining roots, integrated by adaptive Gauss-Kronrod in
``theta``.  Root gaps are formed from the exact linear forms of the roots in
``p^2``, so the integrand stays accurate as roots approach the endpoints.
When the interval shrinks to a double root the same formula gives the
small-oscillation limit ``2 pi / sqrt(|P''|/2)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate as _si

from . import _backend
from .dynsys import SQRT3_2, _write_csv, as_param
from .elliptic import elliptic_E, elliptic_K, elliptic_Pi
from .errors import DivergenceError, PreconditionError
from .separation import LEADING, ROOT_FORMS, QuinticPolynomial, intervals

__all__ = [
    "Estimate", "PeriodEstimate", "PeriodPair", "TransformedQuintic",
    "elliptic_E", "elliptic_K", "elliptic_Pi",
    "T_V_LIMIT", "T_U_SQRT38",
    "period_u", "period_v", "periods", "ratio", "moment", "y_period",
    "mesh_halving", "period_table", "write_period_table",
]

# closed forms at p = sqrt(3/8)
T_V_LIMIT = 8.0 * math.pi / (3.0 * math.sqrt(10.0))
T_U_SQRT38 = 0.8 * elliptic_Pi(0.4, 0.25)

RTOL = 1e-13
ATOL = 1e-15
MAX_INTERVALS = 4000


class Estimate(NamedTuple):
    value: float
    error: float


class PeriodEstimate(NamedTuple):
    value: float
    error: float
    mesh: np.ndarray | None = None


@dataclass(frozen=True)
class PeriodPair:
    """``(T_u, T_v)`` at one ``p`` with quadrature error estimates."""

    p: float
    t_u: float
    t_v: float
    err_u: float
    err_v: float

    @property
    def ratio(self):
        return self.t_v / self.t_u

    @property
    def ratio_error(self):
        return self.ratio * (self.err_u / self.t_u + self.err_v / self.t_v)


def _kernel_args(P, lo, hi, power):
    others = [k for k in ROOT_FORMS if k not in (lo, hi)]
    return (P.gap(hi, lo), [P.gap(lo, r) for r in others],
            [P.gap(hi, r) for r in others], -LEADING, P.root(lo), power)


def _root_integral(p, lo, hi, power=0, *, rtol=RTOL, atol=ATOL,
                   max_intervals=MAX_INTERVALS, backend=None):
    """``int_lo^hi s^power ds / sqrt(P)`` between two labelled roots."""
    P = QuinticPolynomial(p)
    args = _kernel_args(P, lo, hi, power)
    val, err, mesh = _backend.get(backend).hyperelliptic_quad(
        *args, rtol, atol, max_intervals)
    return PeriodEstimate(val, err, np.asarray(mesh))


def _u_labels(prm):
    return intervals(prm).alpha0_label, "half"


def _v_labels(prm):
    iv = intervals(prm)
    return iv.a0_label, iv.a1_label


def period_u(p, **kw):
    """Period of ``u`` in the separating time.

    Raises
    ------
    DivergenceError
        At ``p = sqrt(3)/2``, where both endpoints become double roots.
    """
    prm = as_param(p)
    if prm.is_sqrt3_2:
        raise DivergenceError("T_u diverges at p = sqrt(3)/2")
    r = _root_integral(prm, *_u_labels(prm), **kw)
    return PeriodEstimate(2.0 * r.value, 2.0 * r.error, r.mesh)


class TransformedQuintic:
    """``Q(r) = 2r(1-2r)[2p^2 + c r][2 - 2p^2 - c r][3 - 4p^2 - 2c r]``, ``c = 3 - 8p^2``.

    The image of ``P`` under ``s = c r - 3/2 + 2p^2`` (divided by ``c^2``),
    which maps ``r in [0, 1/2]`` onto the ``v``-interval for ``p^2 < 3/4``.
    """

    def __init__(self, p):
        prm = as_param(p)
        if not prm.p < math.sqrt(0.75) or prm.is_sqrt3_2:
            raise PreconditionError("the r-form needs p < sqrt(3)/2")
        self.p2 = prm.p2
        self.c = 3.0 - 8.0 * self.p2

    def cofactor(self, r):
        """``Q(r) / (2r(1 - 2r))``, positive on ``[0, 1/2]``."""
        p2, c = self.p2, self.c
        return ((2.0 * p2 + c * r) * (2.0 - 2.0 * p2 - c * r)
                * (3.0 - 4.0 * p2 - 2.0 * c * r))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r * (1.0 - 2.0 * r) * self.cofactor(r)

    @property
    def coefficients(self):
        p2, c = self.p2, self.c
        out = np.array([-4.0, 2.0, 0.0])
        for f in ([c, 2.0 * p2], [-c, 2.0 - 2.0 * p2], [-2.0 * c, 3.0 - 4.0 * p2]):
            out = np.polymul(out, f)
        return out


def _period_v_q(prm, rtol):
    # QAWS: int_0^{1/2} r^{-1/2} (1/2 - r)^{-1/2} / (2 sqrt(X(r))) dr
    Q = TransformedQuintic(prm)
    val, err = _si.quad(lambda r: 0.5 / math.sqrt(Q.cofactor(r)), 0.0, 0.5,
                        weight="alg", wvar=(-0.5, -0.5), epsabs=0.0,
                        epsrel=max(rtol, 1e-13), limit=200)
    return PeriodEstimate(2.0 * val, 2.0 * err, None)


def period_v(p, method="direct", **kw):
    """Period of ``v`` in the separating time.

    Parameters
    ----------
    p : float or InitParam
    method : {"direct", "q"}
        ``"direct"`` integrates ``1/sqrt(P)`` over the ``v``-interval with the
        theta-substitution kernel; ``"q"`` integrates the ``r``-form with
        QUADPACK's algebraic-weight rule (``p < sqrt(3)/2`` only).

    At ``p = sqrt(3/8)`` the closed-form limit ``8 pi / (3 sqrt 10)`` is
    returned by the direct method.
    """
    prm = as_param(p)
    if prm.is_sqrt3_2:
        raise DivergenceError("T_v diverges at p = sqrt(3)/2")
    if method == "q":
        return _period_v_q(prm, kw.get("rtol", RTOL))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    if prm.is_sqrt38:
        return PeriodEstimate(T_V_LIMIT, 0.0, None)
    r = _root_integral(prm, *_v_labels(prm), **kw)
    return PeriodEstimate(2.0 * r.value, 2.0 * r.error, r.mesh)


def periods(p, **kw):
    prm = as_param(p)
    tu = period_u(prm, **kw)
    tv = period_v(prm, **kw)
    return PeriodPair(prm.p, tu.value, tv.value, tu.error, tv.error)


def ratio(p, **kw):
    """``R(p) = T_v / T_u`` with a propagated error bound, ``p in (0, sqrt(3)/2)``."""
    prm = as_param(p)
    if prm.is_sqrt3_2 or prm.p > SQRT3_2:
        raise PreconditionError("R(p) is defined for p in (0, sqrt(3)/2)")
    pp = periods(prm, **kw)
    return Estimate(pp.ratio, pp.ratio_error)


def moment(p, which, **kw):
    """``2 int s ds / sqrt(P)`` over the interval of ``u`` or ``v``.

    This is the integral of the coordinate over one of its periods in
    ``tau``; the ``y``-length of a ``tau``-interval is ``int (u - v) dtau``.
    """
    prm = as_param(p)
    if which == "u":
        lo, hi = _u_labels(prm)
    elif which == "v":
        lo, hi = _v_labels(prm)
        if prm.is_sqrt38:
            return Estimate(-0.75 * T_V_LIMIT, 0.0)
    else:
        raise ValueError("which must be 'u' or 'v'")
    r = _root_integral(prm, lo, hi, 1, **kw)
    return Estimate(2.0 * r.value, 2.0 * r.error)


def y_period(p, q=None, m=None, **kw):
    """Length in ``y`` of the common period of ``(u, v)``.

    For ``R = q/m`` the pair returns after ``q`` periods of ``u`` and ``m``
    of ``v``, so ``Y = q M_u - m M_v`` with the first moments ``M``.  At
    ``p = sqrt(3/8)`` (``v = -3/4`` constant) one period of ``u`` suffices.
    The period of ``(phi1, phi2)`` is ``2 Y``.
    """
    prm = as_param(p)
    mu = moment(prm, "u", **kw)
    if prm.is_sqrt38:
        tu = period_u(prm, **kw)
        return Estimate(mu.value + 0.75 * tu.value, mu.error + 0.75 * tu.error)
    if q is None or m is None:
        raise PreconditionError("q and m are required away from p = sqrt(3/8)")
    mv = moment(prm, "v", **kw)
    return Estimate(q * mu.value - m * mv.value, q * mu.error + m * mv.error)


def mesh_halving(p, which="u", backend=None):
    """Change of a period when every cell of the adaptive mesh is halved.

    Returns ``(delta, error_estimate)``.
    """
    prm = as_param(p)
    lo, hi = _u_labels(prm) if which == "u" else _v_labels(prm)
    r = _root_integral(prm, lo, hi, backend=backend)
    mesh = r.mesh
    fine = np.sort(np.concatenate([mesh, 0.5 * (mesh[1:] + mesh[:-1])]))
    P = QuinticPolynomial(prm)
    val, _ = _backend.get(backend).hyperelliptic_fixed(
        *_kernel_args(P, lo, hi, 0), fine)
    return Estimate(2.0 * abs(val - r.value), 2.0 * r.error)


# -- tables ------------------------------------------------------------------

def _row(p):
    pp = periods(p)
    return (pp.p, pp.t_u, pp.t_v, pp.ratio, pp.err_u, pp.err_v)


def period_table(ps, threads=1):
    """Rows ``(p, T_u, T_v, R, err_u, err_v)`` in the order of ``ps``."""
    ps = [float(p) for p in ps]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(_row, ps))
    return [_row(p) for p in ps]


def write_period_table(path_or_file, rows):
    _write_csv(path_or_file, ["p", "T_u", "T_v", "R", "err_u", "err_v"], rows)


def lambda_area_target():
    """``12 pi E(2 sqrt(2)/3)``."""
    return 12.0 * math.pi * elliptic_E(2.0 * math.sqrt(2.0) / 3.0)
