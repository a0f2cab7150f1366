"""Periodicity, rational period ratios, zero counts and orbit shapes.

For ``p < sqrt(3)/2`` the solution is periodic exactly when ``u`` and ``v``
share a common period, i.e. when ``R(p) = T_v/T_u = q/m`` is rational (or
``v`` is constant, at ``p = sqrt(3/8)``).  Then ``(u, v)`` has period
``T = q T_u = m T_v`` in ``tau`` and ``Y = q M_u - m M_v`` in ``y``, and
``(phi1, phi2)`` has period ``2Y``.  Since ``phi1^2 = -4uv/3`` vanishes only
where ``u = 0``, ``phi1`` has ``2q`` zeros per period.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import optimize as _so

from . import periods as _per
from .dynsys import SQRT38, SQRT3_2, as_param, integrate
from .errors import PreconditionError
from .separation import intervals, reparameterize, uv_from_phase

__all__ = [
    "RatioResult", "CriticalPoints", "SolutionClass", "ZeroCount",
    "detect_rational", "ratio_result", "solve_ratio_equation",
    "count_zeros_per_period", "phi2_vanishing", "critical_points",
    "shape_for", "half_period_point", "classify", "orbit_coverage",
    "classify_periodic", "fractions_in", "R_ENCLOSURE",
]

R_ENCLOSURE = (1.480473, 1.507784)

KIND_DECAYING = "Decaying"
KIND_PHI2_VANISHES = "Phi2Vanishes"
KIND_PERIODIC = "Periodic"
KIND_QUASI = "QuasiPeriodic"

SHAPE_AA = "OscillatingAA'"
SHAPE_BB = "OscillatingBB'"
SHAPE_CLOSED = "ClosedThroughAxis"
SHAPE_HYPERBOLA = "DegenerateHyperbola"

ODE_TOL = 1e-12


# -- rational detection ------------------------------------------------------

def _simplest_between(lo, hi):
    # smallest-denominator fraction in [lo, hi] (0 <= lo <= hi), by the
    # run-length form of the Stern-Brocot descent
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / _simplest_between(1 / (hi - fl), 1 / (lo - fl))


def detect_rational(R, eps, denom_cap=10_000):
    """Smallest-denominator fraction within ``eps`` of ``R``.

    Returns a :class:`fractions.Fraction` with denominator at most
    ``denom_cap``, or ``None``.
    """
    if not (eps > 0.0):
        raise ValueError("eps must be positive")
    lo = Fraction(R) - Fraction(eps)
    hi = Fraction(R) + Fraction(eps)
    if lo < 0:
        if hi < 0:
            f = _simplest_between(-hi, -lo)
            return -f if f.denominator <= denom_cap else None
        return Fraction(0)
    f = _simplest_between(lo, hi)
    return f if f.denominator <= denom_cap else None


@dataclass(frozen=True)
class RatioResult:
    p: float
    R: float
    eps: float
    rational: Fraction | None

    @property
    def certainty(self):
        return (self.R - self.eps, self.R + self.eps)


def ratio_result(p, eps=None, denom_cap=10_000):
    """``R(p)`` together with rational detection at tolerance ``eps``.

    ``eps`` defaults to ten times the propagated quadrature error, with a
    floor of ``1e-12``.
    """
    est = _per.ratio(p)
    eps = max(10.0 * est.error, 1e-12) if eps is None else eps
    return RatioResult(as_param(p).p, est.value, eps,
                       detect_rational(est.value, eps, denom_cap))


# -- solving R(p) = q/m -----------------------------------------------------

def _grid():
    # fine near both ends, where R approaches 3/2 logarithmically
    left = np.geomspace(1e-9, 0.05, 360)
    mid = np.linspace(0.05, SQRT3_2 - 0.05, 400)[1:-1]
    right = SQRT3_2 - np.geomspace(0.05, 1e-10, 360)
    return np.unique(np.concatenate([left, mid, right]))


@lru_cache(maxsize=1)
def _grid_values():
    ps = _grid()
    rs = np.array([_per.ratio(p).value for p in ps])
    return ps, rs


def solve_ratio_equation(target, tol=1e-10):
    """All ``p in (0, sqrt(3)/2)`` with ``R(p) = target``.

    Roots are bracketed on a cached composite grid (geometric towards both
    ends) and polished with Brent's method.  Roots whose residual exceeds
    ``tol`` are dropped.
    """
    t = float(target)
    if not (1.0 < t < 2.0):
        return []
    ps, rs = _grid_values()
    g = rs - t
    roots = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]:
        a, b = ps[i], ps[i + 1]
        if g[i] == 0.0:
            r = a
        elif g[i + 1] == 0.0:
            continue
        else:
            r = _so.brentq(lambda p: _per.ratio(p).value - t, a, b,
                           xtol=1e-16, rtol=1e-15, maxiter=200)
        if abs(_per.ratio(r).value - t) < tol:
            roots.append(float(r))
    return roots


# -- zero counting -----------------------------------------------------------

@dataclass(frozen=True)
class ZeroCount:
    p: float
    fraction: Fraction | None
    zeros_phi1: int
    predicted: int
    phi2_min: float
    period_y: float
    recurrence: float
    zero_locations: tuple


def _resolve_fraction(prm, fraction):
    if prm.is_sqrt38:
        return None
    if fraction is None:
        rr = ratio_result(prm, eps=1e-9, denom_cap=1000)
        if rr.rational is None:
            raise PreconditionError(f"p = {prm.p!r} is not numerically periodic")
        return rr.rational
    return Fraction(fraction)


def _refined_zeros(traj, comp, a, b, n, min_sep):
    ys = np.linspace(a, b, n)
    vals = traj(ys)[:, comp]
    s = np.sign(vals)
    out = []
    for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        z = _so.brentq(lambda y: traj(y)[comp], ys[i], ys[i + 1], xtol=1e-14)
        if not out or z - out[-1] > min_sep:
            out.append(z)
    return out


def count_zeros_per_period(p, fraction=None, *, tol=ODE_TOL, samples_per_step=24):
    """Zeros of ``phi1`` and the minimum of ``phi2`` over one period.

    Parameters
    ----------
    p : float or InitParam
        Must give a periodic solution.
    fraction : Fraction or str, optional
        ``q/m = R(p)``; detected from ``R`` when omitted.

    The window ``[y0, y0 + 2Y]`` starts at a point where ``phi1 != 0``;
    sign changes on a dense sample are refined by Brent's method and merged
    when closer than ``1e-3`` of the period.
    """
    prm = as_param(p)
    if prm.p >= SQRT3_2:
        raise PreconditionError("zero counting needs p < sqrt(3)/2")
    frac = _resolve_fraction(prm, fraction)
    if frac is None:
        Y = _per.y_period(prm).value
        q = 1
    else:
        q, m = frac.numerator, frac.denominator
        Y = _per.y_period(prm, q, m).value
    period = 2.0 * Y
    # irrational offset keeps the window ends away from the zero at y = 0
    y0 = 0.5 * period / (q * (1.0 + math.sqrt(5.0)))
    traj = integrate(prm, y0 + period, tol)
    n = max(20_001, samples_per_step * traj.n_steps)
    zeros = _refined_zeros(traj, 0, y0, y0 + period, n, 1e-3 * period)
    _, st = traj.sample(n)
    rec = float(np.max(np.abs(traj(period) - traj(0.0))))
    return ZeroCount(prm.p, frac, len(zeros), 2 * q, float(st[:, 1].min()), period,
                     rec, tuple(zeros))


def phi2_vanishing(p, *, tol=ODE_TOL):
    """First zero of ``phi2`` and whether it occurs within one ``v``-period.

    For ``p > sqrt(3)/2`` the coordinate ``v`` reaches ``-3/2`` (where
    ``phi2 = 0``) once per period ``T_v``.  Since ``u - v <= 2``, one
    ``v``-period spans at most ``2 T_v`` in ``y``.

    Returns
    -------
    (y_zero, tau_zero, t_v) : tuple of float
        ``y_zero`` is NaN when no zero is found.
    """
    prm = as_param(p)
    if prm.p <= SQRT3_2 or prm.is_sqrt3_2:
        raise PreconditionError("phi2 vanishes only for p > sqrt(3)/2")
    t_v = _per.period_v(prm).value
    traj = integrate(prm, 2.0 * t_v + 1.0, tol)
    sep = reparameterize(traj)
    zs = _refined_zeros(traj, 1, 0.0, traj.y_end, max(20_001, 24 * traj.n_steps), 0.0)
    if not zs:
        return math.nan, math.nan, t_v
    return zs[0], float(sep.tau_of_y(zs[0])[0]), t_v


# -- shapes ------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoints:
    """``A = (2p/sqrt3, sqrt(1 - 4p^2/3))``, ``B`` its swap, primes the mirror images."""

    A: tuple
    B: tuple
    A_prime: tuple
    B_prime: tuple


def critical_points(p):
    prm = as_param(p)
    if prm.p > SQRT3_2:
        raise PreconditionError("A and B are real only for p <= sqrt(3)/2")
    x = 2.0 * prm.p / math.sqrt(3.0)
    yv = math.sqrt(max(1.0 - 4.0 * prm.p2 / 3.0, 0.0))
    return CriticalPoints((x, yv), (yv, x), (-x, yv), (-yv, x))


def shape_for(p, fraction):
    """Shape from the parities of ``q`` and ``m``.

    At half the ``(u, v)`` period ``u`` sits at ``1/2`` when ``q`` is odd and
    at ``0`` when ``q`` is even; ``v`` sits at the endpoint opposite to
    ``v(0)`` when ``m`` is odd.  This gives ``A`` (``q, m`` odd), ``B``
    (``q`` odd, ``m`` even) and the axis point ``(0, sqrt(3/4 - p^2))``
    (``q`` even).
    """
    prm = as_param(p)
    if prm.is_sqrt38:
        return SHAPE_HYPERBOLA
    q, m = fraction.numerator, fraction.denominator
    if q % 2 == 0:
        return SHAPE_CLOSED
    return SHAPE_AA if m % 2 else SHAPE_BB


def half_period_point(p, fraction):
    """Predicted ``(u, v)`` and ``(phi1, phi2)`` at half the ``(u, v)`` period."""
    prm = as_param(p)
    iv = intervals(prm)
    v0 = 2.0 * prm.p2 - 1.5
    v_other = iv.a0 if iv.a1 == v0 else iv.a1
    if prm.is_sqrt38:
        q, m = 1, 1
    else:
        q, m = fraction.numerator, fraction.denominator
    u = 0.5 if q % 2 else 0.0
    v = v_other if m % 2 else v0
    phi1 = math.sqrt(max(-2.0 * u * v / 3.0, 0.0) * 2.0)
    phi2 = math.sqrt(max((3.0 + 2.0 * u) * (3.0 + 2.0 * v) / 12.0, 0.0))
    return (u, v), (phi1, phi2)


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class SolutionClass:
    p: float
    kind: str
    R: float | None = None
    fraction: Fraction | None = None
    period: float | None = None
    period_y: float | None = None
    zeros_phi1: int | None = None
    phi2_min: float | None = None
    phi2_positive: bool | None = None
    shape: str | None = None

    @property
    def extremal_candidate(self):
        """Two zeros of ``phi1`` per period with ``phi2`` positive throughout."""
        return self.zeros_phi1 == 2 and bool(self.phi2_positive)

    def to_dict(self):
        d = asdict(self)
        d["fraction"] = None if self.fraction is None else str(self.fraction)
        d["extremal_candidate"] = self.extremal_candidate
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def classify(p, *, eps=None, denom_cap=10_000, count_zeros=True):
    """Classify the solution started from ``p``.

    ``eps`` is the rational-detection tolerance (default: ten times the
    quadrature error of ``R``).
    """
    prm = as_param(p)
    if prm.is_sqrt3_2:
        return SolutionClass(prm.p, KIND_DECAYING, phi2_positive=True)
    if prm.p > SQRT3_2:
        return SolutionClass(prm.p, KIND_PHI2_VANISHES, phi2_positive=False)
    if prm.is_sqrt38:
        zc = count_zeros_per_period(prm) if count_zeros else None
        return SolutionClass(
            prm.p, KIND_PERIODIC, R=_per.T_V_LIMIT / _per.T_U_SQRT38,
            period=_per.T_U_SQRT38, period_y=2.0 * _per.y_period(prm).value,
            zeros_phi1=zc.zeros_phi1 if zc else 2,
            phi2_min=zc.phi2_min if zc else SQRT38,
            phi2_positive=True, shape=SHAPE_HYPERBOLA)
    rr = ratio_result(prm, eps, denom_cap)
    if rr.rational is None:
        return SolutionClass(prm.p, KIND_QUASI, R=rr.R, phi2_positive=True)
    frac = rr.rational
    q, m = frac.numerator, frac.denominator
    tu = _per.period_u(prm).value
    zc = count_zeros_per_period(prm, frac) if count_zeros else None
    return SolutionClass(
        prm.p, KIND_PERIODIC, R=rr.R, fraction=frac, period=q * tu,
        period_y=2.0 * _per.y_period(prm, q, m).value,
        zeros_phi1=zc.zeros_phi1 if zc else 2 * q,
        phi2_min=zc.phi2_min if zc else None,
        phi2_positive=(zc.phi2_min > 0.0) if zc else True,
        shape=shape_for(prm, frac))


def orbit_coverage(p, n_periods=200, bins=100, *, tol=1e-10):
    """Fraction of the ``bins x bins`` cells of ``I1 x I2`` visited by ``(u, v)``.

    The orbit is followed for ``n_periods`` periods of ``u`` in ``tau``.
    """
    prm = as_param(p)
    iv = intervals(prm)
    tu = _per.period_u(prm).value
    # mean of u - v over tau, from the first moments
    gap = (_per.moment(prm, "u").value / tu
           - _per.moment(prm, "v").value / _per.period_v(prm).value)
    traj = integrate(prm, 1.02 * n_periods * tu * gap, tol)
    sep = reparameterize(traj)
    n_tau = int(sep.taus[-1] / tu * bins * 8)
    y = np.linspace(0.0, traj.y_end, max(n_tau, 10 * traj.n_steps))
    u, v, *_ = uv_from_phase(traj(y))
    fu = np.clip((u - iv.alpha0) / (0.5 - iv.alpha0), 0.0, 1.0 - 1e-12)
    fv = np.clip((v - iv.a0) / (iv.a1 - iv.a0), 0.0, 1.0 - 1e-12)
    hist = np.zeros((bins, bins), dtype=bool)
    hist[(fu * bins).astype(int), (fv * bins).astype(int)] = True
    return float(hist.mean()), float(sep.taus[-1] / tu)


def classify_periodic(p, fraction, *, tol=ODE_TOL):
    """Classify a known member of the periodic set with ``R(p) = fraction``.

    Unlike :func:`classify` the fraction is taken as given rather than
    detected, as for roots returned by :func:`solve_ratio_equation`.
    """
    prm = as_param(p)
    if prm.is_sqrt38:
        return classify(prm)
    frac = Fraction(fraction)
    q, m = frac.numerator, frac.denominator
    zc = count_zeros_per_period(prm, frac, tol=tol)
    return SolutionClass(
        prm.p, KIND_PERIODIC, R=_per.ratio(prm).value, fraction=frac,
        period=q * _per.period_u(prm).value, period_y=zc.period_y,
        zeros_phi1=zc.zeros_phi1, phi2_min=zc.phi2_min,
        phi2_positive=zc.phi2_min > 0.0, shape=shape_for(prm, frac))


def fractions_in(lo, hi, denom_cap):
    """Irreducible ``q/m`` in ``[lo, hi]`` with ``m <= denom_cap``, ordered by ``(m, q)``."""
    out = []
    for m in range(1, denom_cap + 1):
        for q in range(math.ceil(lo * m), math.floor(hi * m) + 1):
            if math.gcd(q, m) == 1 and lo <= q / m <= hi:
                out.append(Fraction(q, m))
    return out
