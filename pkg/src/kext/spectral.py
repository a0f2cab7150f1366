"""Spectral certificate for the extremal Klein-bottle metric.

A metric ``f(y) (dx^2 + dy^2)`` on the torus ``[0, X) x [0, a)`` descends to
the Klein bottle through ``(x, y) -> (x + X/2, -y)``.  Separating
``phi(y) e^{i kappa_k x}`` with ``kappa_k = 2 pi k / X`` gives

    -phi'' + kappa_k^2 phi = lambda f phi,    phi(-y) = (-1)^k phi(y),

on the ``a``-periodic functions.  Even (odd) solutions are those of the
half-period problem on ``[0, a/2]`` with Neumann (Dirichlet) conditions at
both ends.  Modes with ``k >= 1`` come in ``cos``/``sin`` pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg as _sl
from scipy import special as _sp

from . import periods as _per
from .dynsys import SQRT38, as_param, integrate
from .errors import DomainError, PreconditionError

__all__ = [
    "MetricProfile", "SpectralReport", "EigenSolution",
    "build_metric_from_ode", "build_metric_closed_form", "closed_form_factor",
    "sturm_liouville_eigs", "verify_extremal", "nodal_count",
    "rayleigh_residual", "area", "TARGET_PRODUCT", "MODES",
]

TARGET_PRODUCT = 12.0 * math.pi * _per.elliptic_E(2.0 * math.sqrt(2.0) / 3.0)

# the (k, parity) classes allowed on the Klein bottle
MODES = ((0, "even"), (1, "odd"), (2, "even"), (3, "odd"))


@dataclass(frozen=True, eq=False)
class MetricProfile:
    """Conformal factor ``f`` of a Klein-bottle metric ``f(y)(dx^2 + dy^2)``.

    Attributes
    ----------
    func : callable
        Vectorised ``f(y)``, even about ``y = 0``.
    a : float
        ``y``-period of the torus (the period of the eigenfunctions).
    x_period : float
        ``x``-period of the torus.
    provenance : str
        ``"FromODE(p)"`` or ``"ClosedForm"``.
    samples : ndarray
        ``f`` on the uniform grid ``j a / n``, ``j = 0..n-1``.
    """

    func: Callable
    a: float
    x_period: float
    provenance: str
    samples: np.ndarray = field(repr=False)

    @property
    def grid(self):
        n = len(self.samples)
        return np.arange(n) * (self.a / n)

    def wavenumber(self, k):
        return 2.0 * math.pi * k / self.x_period

    @classmethod
    def from_function(cls, func, a, x_period, provenance="custom", grid_size=4096):
        """Profile from a vectorised, even, ``a``-periodic ``f > 0``."""
        ys = np.arange(grid_size) * (a / grid_size)
        samples = np.asarray(func(ys), dtype=float)
        if np.any(samples <= 0.0):
            raise DomainError("conformal factor must be positive")
        return cls(func, float(a), float(x_period), provenance, samples)



def build_metric_from_ode(p=SQRT38, grid_size=4096, tol=1e-12):
    """``f = phi1^2 + 4 phi2^2`` along the solution from ``p = sqrt(3/8)``.

    This is the one periodic solution with two zeros of ``phi1`` per period
    and ``phi2 > 0``.

    ``f`` is ``Y``-periodic (it equals ``2u + 3/2``) while ``phi1`` and
    ``phi2`` have period ``a = 2Y``; the profile records ``a`` as the torus
    ``y``-period and ``X = 2 pi``.
    """
    prm = as_param(p)
    if not prm.is_sqrt38:
        raise PreconditionError("the extremal profile needs p = sqrt(3/8)")
    Y = _per.y_period(prm).value
    traj = integrate(prm, Y, tol)

    def f(y):
        y = np.abs(np.mod(np.asarray(y, dtype=float) + 0.5 * Y, Y) - 0.5 * Y)
        st = traj(y)
        return st[..., 0] ** 2 + 4.0 * st[..., 1] ** 2

    return MetricProfile.from_function(f, 2.0 * Y, 2.0 * math.pi,
                                       f"FromODE({prm.p!r})", grid_size)


def closed_form_factor(v):
    """``F(v) = (9 + w^2)/w`` with ``w = 1 + 8 cos^2 v``."""
    w = 1.0 + 8.0 * np.cos(v) ** 2
    return w + 9.0 / w


_M_G0 = 8.0 / 9.0


def build_metric_closed_form(grid_size=4096):
    """The metric ``F(v)(du^2 + dv^2/w)`` in conformal-over-flat form.

    With ``y = int dv / sqrt(w) = F(v | 8/9)/3`` (incomplete integral of the
    first kind) the metric is ``F (du^2 + dy^2)`` and ``cos v = cn(3y | 8/9)``.
    The torus has ``y``-period ``Y0 = (2/3) K(8/9)`` (``F`` itself repeats
    after ``Y0/2``) and ``u`` has period ``pi``.  Under ``x = 2u``,
    ``y -> 2y`` this is the ODE profile: ``F(y) = 4 f(2y)``.  The profile is centred at the minimum of ``F``
    (``cos^2 v = 1/4``), the symmetry point matching ``y = 0`` of the ODE
    profile.
    """
    if grid_size < 16:
        raise DomainError("grid_size must be at least 16")
    y_c = _sp.ellipkinc(math.pi / 3.0, _M_G0) / 3.0
    Y0 = 2.0 * _sp.ellipk(_M_G0) / 3.0

    def F(y):
        cn = _sp.ellipj(3.0 * (np.asarray(y, dtype=float) + y_c), _M_G0)[1]
        w = 1.0 + 8.0 * cn * cn
        return w + 9.0 / w

    return MetricProfile.from_function(F, Y0, math.pi, "ClosedForm", grid_size)


def area(profile, n=None):
    """``A = (X/2) int_0^a f dy`` (half the torus), by the periodic trapezoid rule."""
    if n is None:
        vals = profile.samples
    else:
        vals = profile.func(np.arange(n) * (profile.a / n))
    return 0.5 * profile.x_period * profile.a * float(np.mean(vals))


# -- Sturm-Liouville ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Eigenpairs on the half period ``[0, a/2]``.

    ``vectors[:, i]`` holds the ``i``-th eigenfunction on ``nodes``
    (including the Dirichlet boundary zeros for odd parity).
    """

    k: int
    parity: str
    values: np.ndarray
    vectors: np.ndarray
    nodes: np.ndarray
    f: np.ndarray
    h: float
    kappa: float


def _half_grid(profile, n):
    h = 0.5 * profile.a / n
    nodes = np.arange(n + 1) * h
    f = np.asarray(profile.func(nodes), dtype=float)
    if np.any(f <= 0.0):
        raise DomainError("conformal factor must be positive")
    return nodes, f, h


def sturm_liouville_eigs(profile, k, parity, count=3, n=4096, vectors=False):
    """Lowest ``count`` eigenvalues of ``-phi'' + kappa_k^2 phi = lambda f phi``.

    Three-point differences on ``n`` cells of ``[0, a/2]`` with a lumped
    (diagonal) mass matrix; Neumann ends carry half weights.  The symmetric
    generalised problem is reduced to tridiagonal form by ``M^{-1/2}``.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    if count < 1:
        raise ValueError("count must be >= 1")
    nodes, f, h = _half_grid(profile, n)
    kappa = profile.wavenumber(k)
    if parity == "even":
        w = np.ones(n + 1)
        w[0] = w[-1] = 0.5
        diag = np.full(n + 1, 2.0 / h)
        diag[0] = diag[-1] = 1.0 / h
        diag += kappa ** 2 * w * h
        mass = w * f * h
        off = np.full(n, -1.0 / h)
        idx = slice(None)
    else:
        diag = np.full(n - 1, 2.0 / h) + kappa ** 2 * h
        mass = f[1:-1] * h
        off = np.full(n - 2, -1.0 / h)
        idx = slice(1, -1)
    s = 1.0 / np.sqrt(mass)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    count = min(count, len(d))
    if vectors:
        vals, vecs = _sl.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
        full = np.zeros((n + 1, count))
        full[idx] = vecs * s[:, None]
        full /= np.sqrt(np.sum(full ** 2 * (f * h)[:, None], axis=0))
        return EigenSolution(k, parity, vals, full, nodes, f, h, kappa)
    vals = _sl.eigh_tridiagonal(d, e, eigvals_only=True, select="i",
                                select_range=(0, count - 1))
    return np.asarray(vals)


def rayleigh_residual(sol, i=0):
    """``|int(phi'^2 + kappa^2 phi^2) - lambda int f phi^2| / int f phi^2`` on the grid.

    Uses the same discrete quadratures as the eigensolver.
    """
    phi = sol.vectors[:, i]
    h = sol.h
    w = np.ones_like(phi)
    if sol.parity == "even":
        w[0] = w[-1] = 0.5
    grad = np.sum(np.diff(phi) ** 2) / h
    pot = sol.kappa ** 2 * np.sum(w * phi ** 2) * h
    mass = np.sum(w * sol.f * phi ** 2) * h
    return abs(grad + pot - sol.values[i] * mass) / mass


def _extend(sol, i):
    # half period -> full period [0, a) using the parity
    half = sol.vectors[:, i]
    sign = 1.0 if sol.parity == "even" else -1.0
    return np.concatenate([half[:-1], sign * half[::-1][:-1]])


def nodal_count(profile, k, eigenfunction, parity=None):
    """Sign changes over one period ``[0, a)`` (counted cyclically).

    ``eigenfunction`` is an :class:`EigenSolution` (its lowest mode is
    used, or pass ``(solution, index)``) or samples over a full period.
    """
    if isinstance(eigenfunction, tuple):
        sol, i = eigenfunction
        vals = _extend(sol, i)
    elif isinstance(eigenfunction, EigenSolution):
        vals = _extend(eigenfunction, 0)
    else:
        vals = np.asarray(eigenfunction, dtype=float)
    scale = np.max(np.abs(vals))
    s = np.sign(np.where(np.abs(vals) > 1e-12 * scale, vals, 0.0))
    s = s[s != 0]
    if len(s) == 0:
        return 0
    return int(np.sum(s != np.roll(s, 1)))


# -- report ------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    lambda1: float
    multiplicity: int
    area: float
    product: float
    eigenvalues: dict
    extrapolated: dict
    n: int
    provenance: str

    @property
    def product_over_pi(self):
        return self.product / math.pi

    @property
    def target_12piE(self):
        return TARGET_PRODUCT

    def to_dict(self):
        return {
            "lambda1": self.lambda1,
            "multiplicity": self.multiplicity,
            "area": self.area,
            "product": self.product,
            "product_over_pi": self.product_over_pi,
            "target_12piE": TARGET_PRODUCT,
            "provenance": self.provenance,
            "n": self.n,
            "eigenvalues": {k: list(v) for k, v in self.eigenvalues.items()},
            "extrapolated": {k: list(v) for k, v in self.extrapolated.items()},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def verify_extremal(profile, n=4096, count=3, tol=1e-4, threads=1):
    """Eigenvalues of the allowed modes, ``lambda_1``, multiplicity and ``lambda_1 A``.

    Each eigenvalue is computed on ``n`` and ``n/2`` cells and
    Richardson-extrapolated, ``(4 l_n - l_{n/2})/3``.  ``lambda_1`` is the
    smallest extrapolated value above ``tol``; its multiplicity counts
    ``k = 0`` once and ``k >= 1`` twice over all values within ``tol`` of
    2.
    """
    def solve(mode):
        k, parity = mode
        fine = sturm_liouville_eigs(profile, k, parity, count, n)
        coarse = sturm_liouville_eigs(profile, k, parity, count, n // 2)
        return fine, (4.0 * fine - coarse) / 3.0

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(solve, MODES))
    else:
        results = [solve(m) for m in MODES]

    raw, ext = {}, {}
    mult = 0
    positives = []
    for (k, parity), (fine, extr) in zip(MODES, results):
        key = f"k{k}_{parity}"
        raw[key] = [float(x) for x in fine]
        ext[key] = [float(x) for x in extr]
        weight = 1 if k == 0 else 2
        mult += weight * int(np.sum(np.abs(extr - 2.0) < tol))
        positives.extend(x for x in extr if x > tol)
    lam1 = float(min(positives))
    A = area(profile)
    return SpectralReport(lam1, mult, A, lam1 * A, raw, ext, n, profile.provenance)
