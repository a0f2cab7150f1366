"""The second-order system for (phi1, phi2) and its two first integrals.

The vector field is

    phi1'' = (1 - 2 phi1^2 - 8 phi2^2) phi1
    phi2'' = (4 - 2 phi1^2 - 8 phi2^2) phi2

started from ``(phi1, phi2, phi1', phi2') = (0, p, 2p, 0)`` with
``p in (0, 1]``.  Both first integrals then equal ``-4 p^2 (3 - 4 p^2)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _backend
from .errors import DomainError, IntegrationError

__all__ = [
    "SQRT38", "SQRT3_2", "SPECIAL_EPS",
    "PhaseState", "InitParam", "FirstIntegralValues", "Trajectory",
    "as_param", "rhs", "initial_state", "first_integrals", "expected_integral",
    "integrate", "isometry_residual",
]

SQRT38 = math.sqrt(3.0 / 8.0)
SQRT3_2 = math.sqrt(3.0) / 2.0
SPECIAL_EPS = 1e-12

DEFAULT_RTOL = 1e-10
DEFAULT_MAX_STEPS = 10_000_000


@dataclass(frozen=True)
class PhaseState:
    """Point ``(phi1, phi2, phi1', phi2')`` of phase space at ``y``."""

    y: float
    phi1: float
    phi2: float
    dphi1: float
    dphi2: float

    @classmethod
    def from_array(cls, y, arr):
        a = np.asarray(arr, dtype=float)
        return cls(float(y), *map(float, a))

    def as_array(self):
        return np.array([self.phi1, self.phi2, self.dphi1, self.dphi2])


@dataclass(frozen=True)
class InitParam:
    """The initial value ``p = phi2(0)`` with its regime flags."""

    p: float
    is_sqrt38: bool = dc_field(init=False)
    is_sqrt3_2: bool = dc_field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (math.isfinite(p) and 0.0 < p <= 1.0):
            raise DomainError(f"p must lie in (0, 1], got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "is_sqrt38", abs(p - SQRT38) < SPECIAL_EPS)
        object.__setattr__(self, "is_sqrt3_2", abs(p - SQRT3_2) < SPECIAL_EPS)

    @property
    def p2(self):
        """``p^2``, snapped to 3/8 or 3/4 at the flagged special values."""
        if self.is_sqrt38:
            return 0.375
        if self.is_sqrt3_2:
            return 0.75
        return self.p * self.p

    @property
    def regime(self):
        """``"below"`` for p^2 < 3/4, ``"critical"`` at sqrt(3)/2, else ``"above"``."""
        if self.is_sqrt3_2:
            return "critical"
        return "below" if self.p < SQRT3_2 else "above"

    @property
    def k_expected(self):
        return expected_integral(self.p)


def as_param(p):
    """Coerce a float or :class:`InitParam` to :class:`InitParam`."""
    return p if isinstance(p, InitParam) else InitParam(p)


def expected_integral(p):
    """Common value ``-4 p^2 (3 - 4 p^2)`` of both first integrals."""
    p2 = float(p) ** 2
    return -4.0 * p2 * (3.0 - 4.0 * p2)


@dataclass(frozen=True)
class FirstIntegralValues:
    h1: float
    h2: float
    k_expected: float | None = None

    @property
    def drift(self):
        """``max |H_i - K|`` (NaN when no reference value is attached)."""
        if self.k_expected is None:
            return math.nan
        return max(abs(self.h1 - self.k_expected), abs(self.h2 - self.k_expected))


def _state_array(state):
    if isinstance(state, PhaseState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def rhs(state):
    """Right-hand side of the first-order system.

    Accepts a :class:`PhaseState` or an array whose last axis has length 4.
    """
    a, b, c, d = np.moveaxis(_state_array(state), -1, 0)
    r = 2.0 * a * a + 8.0 * b * b
    return np.stack([c, d, (1.0 - r) * a, (4.0 - r) * b], axis=-1)


def initial_state(p):
    """State at ``y = 0``: ``(0, p, 2p, 0)``."""
    p = as_param(p).p
    return PhaseState(0.0, 0.0, p, 2.0 * p, 0.0)


def _integrals(arr):
    a, b, c, d = np.moveaxis(arr, -1, 0)
    a2, b2 = a * a, b * b
    h1 = (a2 + 4.0 * b2) ** 2 - a2 - 16.0 * b2 + c * c + 4.0 * d * d
    h2 = (12.0 * b2 * (b2 - 1.0) + 3.0 * a2 * b2 + b2 * c * c
          - 2.0 * a * c * b * d + (3.0 + a2) * d * d)
    return h1, h2


def first_integrals(state, p=None):
    """Evaluate ``H1`` and ``H2`` at a phase point.

    Parameters
    ----------
    state : PhaseState or array_like of shape (4,)
    p : float or InitParam, optional
        When given, the expected common value is attached.
    """
    h1, h2 = _integrals(_state_array(state))
    k = None if p is None else as_param(p).k_expected
    return FirstIntegralValues(float(h1), float(h2), k)


# -- integration -------------------------------------------------------------

def _initial_step(s0, rtol, atol, direction):
    # Hairer, Norsett & Wanner, Sec. II.4 (order 8)
    f0 = rhs(s0)
    scale = atol + np.abs(s0) * rtol
    d0 = np.sqrt(np.mean((s0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(s0 + direction * h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1)


def _horner_dense(F, y_old, x):
    out = np.zeros_like(y_old)
    x = x[:, None]
    for i in range(F.shape[1] - 1, -1, -1):
        out += F[:, i]
        out *= x if (F.shape[1] - 1 - i) % 2 == 0 else 1.0 - x
    return out + y_old


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense-output solution of the system for one ``p``.

    Attributes
    ----------
    p : InitParam
    ys : ndarray, shape (n+1,)
        Accepted step boundaries (monotone in the direction of integration).
    states : ndarray, shape (n+1, 4)
    dense : ndarray, shape (n, 7, 4)
        Interpolation coefficients of each step.
    h1, h2 : ndarray, shape (n+1,)
        First integrals at every step boundary.
    n_rejected : int
    rtol, atol : float
    """

    p: InitParam
    ys: np.ndarray
    states: np.ndarray
    dense: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    n_rejected: int
    rtol: float
    atol: float

    def __post_init__(self):
        for name in ("ys", "states", "dense", "h1", "h2"):
            getattr(self, name).setflags(write=False)

    @property
    def y_start(self):
        return float(self.ys[0])

    @property
    def y_end(self):
        return float(self.ys[-1])

    @property
    def n_steps(self):
        return len(self.ys) - 1

    @property
    def drift(self):
        """Per-step ``max_i |H_i - K|``."""
        k = self.p.k_expected
        return np.maximum(np.abs(self.h1 - k), np.abs(self.h2 - k))

    @property
    def max_drift(self):
        return float(self.drift.max())

    def __call__(self, y):
        """Evaluate the state at ``y`` (scalar or array) from the dense output."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        forward = self.ys[-1] >= self.ys[0]
        lo, hi = sorted((self.ys[0], self.ys[-1]))
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(y < lo - tol) or np.any(y > hi + tol):
            raise DomainError(f"y outside the integrated range [{lo}, {hi}]")
        if self.n_steps == 0:
            out = np.repeat(self.states[:1], len(y), axis=0)
            return out[0] if scalar else out
        if forward:
            idx = np.searchsorted(self.ys, y, side="right") - 1
        else:
            idx = len(self.ys) - 1 - np.searchsorted(self.ys[::-1], y, side="left")
        idx = np.clip(idx, 0, self.n_steps - 1)
        h = self.ys[idx + 1] - self.ys[idx]
        x = (y - self.ys[idx]) / h
        out = _horner_dense(self.dense[idx], self.states[idx], x)
        return out[0] if scalar else out

    def state(self, y):
        return PhaseState.from_array(y, self(y))

    def sample(self, n):
        """``n`` uniformly spaced samples ``(y, states)`` over the range."""
        ys = np.linspace(self.ys[0], self.ys[-1], n)
        return ys, self(ys)

    def to_csv(self, path_or_file, n=None):
        """Write ``y,phi1,phi2,dphi1,dphi2,H1,H2`` rows.

        Rows are the step boundaries, or ``n`` uniform dense samples.
        """
        if n is None:
            ys, st = self.ys, self.states
        else:
            ys, st = self.sample(n)
        h1, h2 = _integrals(st)
        rows = np.column_stack([ys, st, h1, h2])
        _write_csv(path_or_file, ["y", "phi1", "phi2", "dphi1", "dphi2", "H1", "H2"], rows)


def _write_csv(path_or_file, header, rows):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format(float(v), ".17g") for v in r])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def integrate(p, y_end, tol=DEFAULT_RTOL, *, atol=None, y_start=0.0,
              state0=None, max_steps=DEFAULT_MAX_STEPS, backend=None):
    """Integrate the system from the parity-determined initial data.

    Parameters
    ----------
    p : float or InitParam
    y_end : float
        End point; may be negative to integrate backwards.
    tol : float
        Relative tolerance of the DOP853 step control.
    atol : float, optional
        Absolute tolerance, default ``tol / 100``.
    y_start : float
        Start of integration; ``state0`` is taken there.
    state0 : array_like, optional
        Overrides the initial state ``(0, p, 2p, 0)``.
    backend : {"cython", "python"}, optional

    Returns
    -------
    Trajectory

    Raises
    ------
    IntegrationError
        If the step size underflows or ``max_steps`` is exceeded.
    """
    prm = as_param(p)
    if not (tol > 0.0):
        raise DomainError("tol must be positive")
    if not math.isfinite(y_end):
        raise DomainError("y_end must be finite")
    atol = tol * 1e-2 if atol is None else float(atol)
    s0 = initial_state(prm).as_array() if state0 is None else np.asarray(state0, float)
    direction = 1.0 if y_end >= y_start else -1.0
    h0 = _initial_step(s0, tol, atol, direction)
    kern = _backend.get(backend)
    ys, states, dense, n_rej, status, y_stop = kern.dop853(
        s0, float(y_start), float(y_end), float(tol), atol, h0, int(max_steps))
    if status == kern.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at y = {y_stop!r}", y_stop)
    if status == kern.STATUS_MAX_STEPS:
        raise IntegrationError(f"max_steps exceeded at y = {y_stop!r}", y_stop)
    h1, h2 = _integrals(states)
    return Trajectory(prm, np.asarray(ys), np.asarray(states), np.asarray(dense),
                      h1, h2, int(n_rej), float(tol), atol)


def isometry_residual(p, trajectory, n=2001, *, circle_tol=1e-8, delta=1e-3):
    """Sup-norm residual of the isometry identity along a trajectory.

    With ``phi0 = sqrt(1 - phi1^2 - phi2^2)`` the identity reads
    ``phi0'^2 + phi1'^2 + phi2'^2 = phi1^2 + 4 phi2^2``.  It is evaluated in
    the form multiplied through by ``phi0^2``,

        (phi1 phi1' + phi2 phi2')^2 + phi0^2 (phi1'^2 + phi2'^2 - f) = 0,

    and divided by ``max(phi0^2, delta)``; away from the unit circle this is
    the plain residual, near it the division by ``phi0`` is avoided.

    Parameters
    ----------
    p : float or InitParam
    trajectory : Trajectory or array_like of shape (m, 4)
    n : int
        Number of dense samples when a :class:`Trajectory` is given.
    """
    as_param(p)
    if isinstance(trajectory, Trajectory):
        _, st = trajectory.sample(n)
    else:
        st = np.atleast_2d(np.asarray(trajectory, dtype=float))
    a, b, c, d = st.T
    phi0sq = 1.0 - a * a - b * b
    if np.any(phi0sq < -circle_tol):
        raise DomainError("trajectory leaves the unit disc; phi0 is not real")
    phi0sq = np.maximum(phi0sq, 0.0)
    f = a * a + 4.0 * b * b
    poly = (a * c + b * d) ** 2 + phi0sq * (c * c + d * d - f)
    return float(np.max(np.abs(poly) / np.maximum(phi0sq, delta))) if len(st) else 0.0
