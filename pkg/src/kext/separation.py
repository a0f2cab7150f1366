"""Hamiltonian variables and the parabolic separation into (u, v).

With ``q1 = phi1/sqrt(2)`` and ``q2 = sqrt(2) phi2`` the system is the
gradient flow ``q'' = -grad V`` for

    V(q1, q2) = (q1^2 + q2^2)^2 - q1^2/2 - 2 q2^2,

whose energy is ``H1/4``.  The parabolic coordinates ``u >= 0 >= v`` are the
roots of ``s^2 - S s - 3 q1^2/2`` with ``S = q1^2 + q2^2 - 3/2``, so that

    q1^2 = -(2/3) u v,    q2^2 = (3 + 2u)(3 + 2v)/6.

In the time ``tau`` with ``dtau/dy = 1/(u - v)`` the coordinates decouple:
``(du/dtau)^2 = P(u)`` and ``(dv/dtau)^2 = P(v)`` with the quintic ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynsys import (InitParam, PhaseState, Trajectory, _write_csv, as_param)
from .errors import DomainError, PreconditionError, SingularMapError

__all__ = [
    "QState", "SeparatedState", "QuinticPolynomial", "OscillationIntervals",
    "Quadrics", "SeparatedTrajectory",
    "to_q", "from_q", "potential", "grad_potential", "to_uv", "from_uv",
    "uv_from_phase", "quintic", "intervals", "accelerations_at_zero",
    "quadrics", "reparameterize",
]

_SQRT2 = math.sqrt(2.0)
_EPS = np.finfo(float).eps


# -- Hamiltonian variables ---------------------------------------------------

@dataclass(frozen=True)
class QState:
    q1: float
    q2: float
    dq1: float
    dq2: float

    def as_array(self):
        return np.array([self.q1, self.q2, self.dq1, self.dq2])


def to_q(state):
    """Map a :class:`PhaseState` (or 4-array, last axis) to Hamiltonian form."""
    if isinstance(state, PhaseState):
        return QState(state.phi1 / _SQRT2, _SQRT2 * state.phi2,
                      state.dphi1 / _SQRT2, _SQRT2 * state.dphi2)
    a = np.asarray(state, dtype=float)
    return a * np.array([1 / _SQRT2, _SQRT2, 1 / _SQRT2, _SQRT2])


def from_q(q, y=0.0):
    """Inverse of :func:`to_q`."""
    if isinstance(q, QState):
        return PhaseState(float(y), _SQRT2 * q.q1, q.q2 / _SQRT2,
                          _SQRT2 * q.dq1, q.dq2 / _SQRT2)
    a = np.asarray(q, dtype=float)
    return a * np.array([_SQRT2, 1 / _SQRT2, _SQRT2, 1 / _SQRT2])


def potential(q1, q2):
    r = q1 * q1 + q2 * q2
    return r * r - 0.5 * q1 * q1 - 2.0 * q2 * q2


def grad_potential(q1, q2):
    """``(dV/dq1, dV/dq2)``."""
    r = q1 * q1 + q2 * q2
    return 4.0 * r * q1 - q1, 4.0 * r * q2 - 4.0 * q2


# -- separated coordinates ---------------------------------------------------

@dataclass(frozen=True)
class SeparatedState:
    """``(u, v)`` with their ``tau``-derivatives at time ``tau``."""

    u: float
    v: float
    du: float
    dv: float
    tau: float = 0.0


def _uv_arrays(q1, q2, dq1, dq2):
    s = q1 * q1 + q2 * q2 - 1.5
    pr = -1.5 * q1 * q1
    d = np.sqrt(s * s + 6.0 * q1 * q1)
    # cancellation-free roots of s^2 - S s + Pr
    big = np.where(s >= 0.0, 0.5 * (s + d), 0.5 * (s - d))
    with np.errstate(divide="ignore", invalid="ignore"):
        other = np.where(big != 0.0, pr / big, 0.0)
    u = np.where(s >= 0.0, big, other)
    v = np.where(s >= 0.0, other, big)
    a = q1 * dq1 + q2 * dq2
    b = q1 * dq1
    du = 2.0 * u * a + 3.0 * b
    dv = -2.0 * v * a - 3.0 * b
    return u, v, du, dv, d


def to_uv(q, tau=0.0):
    """Parabolic coordinates of a :class:`QState`.

    Returns the roots ``u >= 0 >= v`` and their derivatives with respect to
    the separating time ``tau``.

    Raises
    ------
    SingularMapError
        At ``q1 = 0, q2^2 = 3/2`` where ``u = v = 0`` (to roundoff).
    """
    vals = np.array([q.q1, q.q2, q.dq1, q.dq2], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite state")
    u, v, du, dv, d = _uv_arrays(*vals)
    if d <= 8.0 * _EPS:  # u = v to roundoff
        raise SingularMapError("u = v: the parabolic map is singular here")
    return SeparatedState(float(u), float(v), float(du), float(dv), float(tau))


def uv_from_phase(states):
    """Vectorised ``(u, v, du/dtau, dv/dtau, u - v)`` from phase states (m, 4)."""
    q = to_q(np.asarray(states, dtype=float))
    return _uv_arrays(q[..., 0], q[..., 1], q[..., 2], q[..., 3])


def from_uv(s, sign_q1=1, sign_q2=1, *, derivatives=True):
    """Rebuild a :class:`QState` from ``(u, v)`` and the signs of ``q1, q2``.

    The derivatives are recovered from ``du/dtau, dv/dtau`` by solving the
    two linear relations for ``q1 q1'`` and ``q1 q1' + q2 q2'``; they are
    undefined where ``q1`` or ``q2`` vanishes (pass ``derivatives=False``).
    """
    u, v = float(s.u), float(s.v)
    if u < 0.0 or v > 0.0 or v < -1.5:
        raise DomainError("need u >= 0 >= v >= -3/2")
    if sign_q1 not in (1, -1) or sign_q2 not in (1, -1):
        raise DomainError("signs must be +1 or -1")
    q1 = sign_q1 * math.sqrt(max(-2.0 * u * v / 3.0, 0.0))
    q2 = sign_q2 * math.sqrt(max((3.0 + 2.0 * u) * (3.0 + 2.0 * v) / 6.0, 0.0))
    if not derivatives:
        return QState(q1, q2, math.nan, math.nan)
    w = u - v
    if w == 0.0:
        raise SingularMapError("u = v")
    if q1 == 0.0 or q2 == 0.0:
        raise SingularMapError("q1 or q2 vanishes; derivatives undetermined")
    a = (s.du + s.dv) / (2.0 * w)
    b = (s.du - 2.0 * u * a) / 3.0
    return QState(q1, q2, b / q1, (a - b) / q2)


# -- the quintic -------------------------------------------------------------

# roots of P as c0 + c1 p^2
ROOT_FORMS = {
    "zero": (0.0, 0.0),
    "half": (0.5, 0.0),
    "m3_2": (-1.5, 0.0),
    "m2p2": (0.0, -2.0),
    "w": (-1.5, 2.0),     # (4 p^2 - 3)/2
}
LEADING = -8.0


class QuinticPolynomial:
    """``P(s) = s (1 - 2s)(3 + 2s)(2p^2 + s)(3 - 4p^2 + 2s)``.

    Roots are kept symbolically as ``c0 + c1 p^2`` so that differences of
    roots are formed without cancellation.
    """

    def __init__(self, p):
        self.param = as_param(p)
        self.p2 = self.param.p2

    @property
    def p(self):
        return self.param.p

    def root(self, label):
        c0, c1 = ROOT_FORMS[label]
        return c0 + c1 * self.p2

    def gap(self, a, b):
        """``root(a) - root(b)`` evaluated on the linear forms."""
        a0, a1 = ROOT_FORMS[a]
        b0, b1 = ROOT_FORMS[b]
        return (a0 - b0) + (a1 - b1) * self.p2

    @property
    def labels(self):
        return sorted(ROOT_FORMS, key=self.root)

    @property
    def roots(self):
        return np.array(sorted(self.root(k) for k in ROOT_FORMS))

    @property
    def coefficients(self):
        """Expanded coefficients, highest degree first."""
        p2 = self.p2
        c = np.array([1.0, 0.0])  # s
        for f in ([-2.0, 1.0], [2.0, 3.0], [1.0, 2 * p2], [2.0, 3.0 - 4 * p2]):
            c = np.polymul(c, f)
        return c

    def _factors(self, s):
        p2 = self.p2
        return (s, 1.0 - 2.0 * s, 3.0 + 2.0 * s, 2.0 * p2 + s, 3.0 - 4.0 * p2 + 2.0 * s)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        f = self._factors(s)
        return f[0] * f[1] * f[2] * f[3] * f[4]

    def expanded(self, s):
        return np.polyval(self.coefficients, np.asarray(s, dtype=float))

    def derivative(self, s):
        """``P'(s)`` by the product rule on the factored form."""
        s = np.asarray(s, dtype=float)
        f = self._factors(s)
        slopes = (1.0, -2.0, 2.0, 1.0, 2.0)
        out = np.zeros_like(s)
        for i in range(5):
            term = slopes[i]
            for j in range(5):
                if j != i:
                    term = term * f[j]
            out = out + term
        return out

    def __repr__(self):
        return f"QuinticPolynomial(p={self.p!r})"


def quintic(p):
    return QuinticPolynomial(p)


@dataclass(frozen=True)
class OscillationIntervals:
    """``I1 = [alpha0, 1/2]`` for ``u`` and ``I2 = [a0, a1]`` for ``v``.

    The ``*_label`` fields name the roots of ``P`` at each endpoint (keys of
    ``ROOT_FORMS``).
    """

    alpha0: float
    a0: float
    a1: float
    alpha0_label: str
    a0_label: str
    a1_label: str

    @property
    def i1(self):
        return (self.alpha0, 0.5)

    @property
    def i2(self):
        return (self.a0, self.a1)

    @property
    def u_degenerate(self):
        return self.alpha0 == 0.5

    @property
    def v_degenerate(self):
        return self.a0 == self.a1


def intervals(p):
    """Oscillation intervals of ``u`` and ``v``.

    Raises
    ------
    PreconditionError
        At ``p = sqrt(3)/2`` where the intervals collapse onto double roots.
    """
    prm = as_param(p)
    if prm.is_sqrt3_2:
        raise PreconditionError("intervals collapse at p = sqrt(3)/2")
    p2 = prm.p2
    w = 2.0 * p2 - 1.5
    if prm.p < math.sqrt(0.75):
        if p2 <= 0.375:
            return OscillationIntervals(0.0, w, -2.0 * p2, "zero", "w", "m2p2")
        return OscillationIntervals(0.0, -2.0 * p2, w, "zero", "m2p2", "w")
    return OscillationIntervals(w, -1.5, 0.0, "w", "m3_2", "zero")


def initial_uv(p):
    """``(u(0), v(0))``."""
    prm = as_param(p)
    w = 2.0 * prm.p2 - 1.5
    if prm.is_sqrt3_2:
        return 0.0, 0.0
    return (0.0, w) if prm.p < math.sqrt(0.75) else (w, 0.0)


def accelerations_at_zero(p):
    """``(u'', v'')`` at ``y = 0``, derivatives with respect to ``y``.

    Both coordinates start at turning points, so ``u'' = (1/2) P'(u) / (u - v)^2``
    there, and likewise for ``v``.

    Raises
    ------
    SingularMapError
        At ``p^2 = 3/4``.
    """
    prm = as_param(p)
    if prm.is_sqrt3_2:
        raise SingularMapError("accelerations are singular at p = sqrt(3)/2")
    p2 = prm.p2
    d = 3.0 - 4.0 * p2
    a = 12.0 * p2 / d
    b = 16.0 * p2 * (1.0 - p2) * (3.0 - 8.0 * p2) / d
    return (a, b) if prm.p < math.sqrt(0.75) else (b, a)


class Quadrics(NamedTuple):
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    w4: np.ndarray
    delta: np.ndarray


def quadrics(phi1, phi2, p):
    """The quadrics ``w1..w3``, the quartic ``w4`` and ``Delta = -64 phi1^2 phi2^2 w1 w2 w3``."""
    p2 = as_param(p).p2
    x = np.asarray(phi1, dtype=float) ** 2
    z = np.asarray(phi2, dtype=float) ** 2
    c = 3.0 - 4.0 * p2
    w1 = x + z - 1.0
    w2 = p2 * x - c * z + p2 * c
    w3 = -c * x + 16.0 * p2 * z - 4.0 * p2 * c
    w4 = (x + 4.0 * z) ** 2 - 12.0 * z
    return Quadrics(w1, w2, w3, w4, -64.0 * x * z * w1 * w2 * w3)


# -- time change -------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class SeparatedTrajectory:
    """A :class:`Trajectory` together with the separating time ``tau(y)``.

    ``taus[i]`` is ``tau`` at the step boundary ``trajectory.ys[i]``.
    """

    trajectory: Trajectory
    taus: np.ndarray
    min_gap: float

    @property
    def p(self):
        return self.trajectory.p

    def _gap(self, y):
        return uv_from_phase(self.trajectory(y))[4]

    def _step_index(self, y):
        ys = self.trajectory.ys
        idx = np.searchsorted(ys, y, side="right") - 1
        return np.clip(idx, 0, len(ys) - 2)

    def tau_of_y(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ys = self.trajectory.ys
        idx = self._step_index(y)
        y0 = ys[idx]
        half = 0.5 * (y - y0)
        nodes = y0[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        g = self._gap(nodes.ravel()).reshape(nodes.shape)
        return self.taus[idx] + half * ((1.0 / g) @ _GL_W)

    def y_of_tau(self, tau):
        """Invert ``tau(y)`` by Newton iteration (``dy/dtau = u - v > 0``)."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        ys, taus = self.trajectory.ys, self.taus
        if np.any(tau < taus[0] - 1e-12) or np.any(tau > taus[-1] + 1e-12):
            raise DomainError("tau outside the covered range")
        idx = np.clip(np.searchsorted(taus, tau, side="right") - 1, 0, len(taus) - 2)
        frac = (tau - taus[idx]) / (taus[idx + 1] - taus[idx])
        y = ys[idx] + frac * (ys[idx + 1] - ys[idx])
        for _ in range(30):
            dy = (self.tau_of_y(y) - tau) * self._gap(y)
            y = np.clip(y - dy, ys[0], ys[-1])
            if np.max(np.abs(dy)) <= 4e-16 * max(1.0, float(np.max(np.abs(y)))):
                break
        return y

    def at_y(self, y):
        """``(tau, u, v, du, dv)`` at the given ``y`` values."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u, v, du, dv, _ = uv_from_phase(self.trajectory(y))
        return self.tau_of_y(y), u, v, du, dv

    def sample(self, n):
        """``n`` samples uniform in ``tau``: ``(tau, y, u, v, du, dv)``."""
        tau = np.linspace(self.taus[0], self.taus[-1], n)
        y = self.y_of_tau(tau)
        u, v, du, dv, _ = uv_from_phase(self.trajectory(y))
        return tau, y, u, v, du, dv

    def residual(self, n=4001):
        """``max(|du^2 - P(u)|, |dv^2 - P(v)|)`` over ``n`` samples in ``y``."""
        ys = np.linspace(self.trajectory.y_start, self.trajectory.y_end, n)
        u, v, du, dv, _ = uv_from_phase(self.trajectory(ys))
        P = QuinticPolynomial(self.p)
        return float(max(np.max(np.abs(du * du - P(u))), np.max(np.abs(dv * dv - P(v)))))

    def to_csv(self, path_or_file, n=None):
        """Write ``tau,y,u,v,du,dv`` at the step boundaries or ``n`` tau-samples."""
        if n is None:
            y = self.trajectory.ys
            u, v, du, dv, _ = uv_from_phase(self.trajectory.states)
            rows = np.column_stack([self.taus, y, u, v, du, dv])
        else:
            rows = np.column_stack(self.sample(n))
        _write_csv(path_or_file, ["tau", "y", "u", "v", "du", "dv"], rows)


def reparameterize(trajectory, *, min_gap=1e-8):
    """Attach the separating time to a forward trajectory.

    ``tau`` is accumulated step by step with 8-point Gauss-Legendre
    quadrature of ``1/(u - v)`` on the dense output.

    Raises
    ------
    SingularMapError
        If ``u - v`` falls below ``min_gap`` at a quadrature node.
    """
    if trajectory.y_end < trajectory.y_start:
        raise PreconditionError("reparameterize needs a forward trajectory")
    ys = trajectory.ys
    h = np.diff(ys)
    nodes = ys[:-1, None] + 0.5 * h[:, None] * (_GL_X[None, :] + 1.0)
    gap = uv_from_phase(trajectory(nodes.ravel()))[4].reshape(nodes.shape)
    gmin = min(float(gap.min()) if gap.size else math.inf,
               float(uv_from_phase(trajectory.states)[4].min()))
    if gmin < min_gap:
        raise SingularMapError(f"u - v = {gmin:g} below {min_gap:g}")
    dtau = 0.5 * h * ((1.0 / gap) @ _GL_W)
    taus = np.concatenate([[0.0], np.cumsum(dtau)])
    return SeparatedTrajectory(trajectory, taus, gmin)
