"""Complete elliptic integrals through Carlson's symmetric forms.

The symmetric integrals ``R_F``, ``R_D`` and ``R_J`` are computed with the
duplication algorithm (B. C. Carlson, Numer. Algorithms 10 (1995) 13-26),
truncated once the fifth-order series is accurate to double precision.
"""

import math

from .errors import DomainError

__all__ = ["carlson_rf", "carlson_rd", "carlson_rj", "carlson_rc",
           "elliptic_K", "elliptic_E", "elliptic_Pi"]

_EPS = 2.220446049250313e-16


def carlson_rc(x, y):
    """``R_C(x, y)`` for ``x >= 0, y > 0``."""
    if x < 0.0 or y <= 0.0:
        raise DomainError("R_C needs x >= 0 and y > 0")
    if x == y:
        return 1.0 / math.sqrt(x)
    if x < y:
        r = math.sqrt(y - x)
        return math.atan2(r, math.sqrt(x)) / r
    # atanh(sqrt((x - y)/x)) = log((sqrt x + r)/sqrt y), written to avoid
    # cancellation both for x >> y and for x close to y
    r = math.sqrt(x - y)
    sx, sy = math.sqrt(x), math.sqrt(y)
    return math.log1p((r + r * r / (sx + sy)) / sy) / r


def _rc1(e):
    # R_C(1, 1 + e), with a series near e = 0
    if abs(e) < 1e-3:
        return 1.0 - e / 3.0 + e * e / 5.0 - e ** 3 / 7.0 + e ** 4 / 9.0 - e ** 5 / 11.0
    if e > 0.0:
        r = math.sqrt(e)
        return math.atan(r) / r
    r = math.sqrt(-e)
    return math.atanh(r) / r


def carlson_rf(x, y, z):
    """``R_F(x, y, z)``; at most one argument may vanish."""
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise DomainError("R_F needs non-negative arguments, at most one zero")
    a0 = a = (x + y + z) / 3.0
    q = (3.0 * _EPS) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    x0, y0 = x, y
    f = 1.0
    while f * q >= abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        f *= 0.25
    X = (a0 - x0) * f / a
    Y = (a0 - y0) * f / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0
            - 3.0 * e2 * e3 / 44.0) / math.sqrt(a)


def carlson_rd(x, y, z):
    """``R_D(x, y, z)`` for ``x, y >= 0`` (not both zero) and ``z > 0``."""
    if min(x, y) < 0.0 or x + y == 0.0 or z <= 0.0:
        raise DomainError("R_D needs x, y >= 0 not both zero, z > 0")
    a0 = a = (x + y + 3.0 * z) / 5.0
    q = (0.25 * _EPS) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    x0, y0 = x, y
    f = 1.0
    acc = 0.0
    while f * q >= abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        acc += f / (sz * (z + lam))
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        f *= 0.25
    X = (a0 - x0) * f / a
    Y = (a0 - y0) * f / a
    Z = -(X + Y) / 3.0
    xy = X * Y
    e2 = xy - 6.0 * Z * Z
    e3 = (3.0 * xy - 8.0 * Z * Z) * Z
    e4 = 3.0 * (xy - Z * Z) * Z * Z
    e5 = xy * Z ** 3
    s = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
         - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return f * a ** -1.5 * s + 3.0 * acc


def carlson_rj(x, y, z, p):
    """``R_J(x, y, z, p)`` for non-negative ``x, y, z`` (at most one zero), ``p > 0``."""
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1 or p <= 0.0:
        raise DomainError("R_J needs x, y, z >= 0 (at most one zero) and p > 0")
    a0 = a = (x + y + z + 2.0 * p) / 5.0
    delta = (p - x) * (p - y) * (p - z)
    q = (0.25 * _EPS) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z),
                                            abs(a0 - p))
    x0, y0, z0 = x, y, z
    f = 1.0
    acc = 0.0
    while f * q >= abs(a):
        sx, sy, sz, sp = math.sqrt(x), math.sqrt(y), math.sqrt(z), math.sqrt(p)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = f ** 3 * delta / (d * d)
        acc += f / d * _rc1(e)
        x, y, z, p = (0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam),
                      0.25 * (p + lam))
        a = 0.25 * (a + lam)
        f *= 0.25
    X = (a0 - x0) * f / a
    Y = (a0 - y0) * f / a
    Z = (a0 - z0) * f / a
    P = -(X + Y + Z) / 2.0
    e2 = X * Y + X * Z + Y * Z - 3.0 * P * P
    e3 = X * Y * Z + 2.0 * e2 * P + 4.0 * P ** 3
    e4 = (2.0 * X * Y * Z + e2 * P + 3.0 * P ** 3) * P
    e5 = X * Y * Z * P * P
    s = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
         - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return f * a ** -1.5 * s + 6.0 * acc


def elliptic_K(m):
    """Complete integral of the first kind, parameter ``m = k^2 < 1``."""
    if not (m < 1.0):
        raise DomainError("K(m) needs m < 1")
    return carlson_rf(0.0, 1.0 - m, 1.0)


def elliptic_E(k):
    """Complete integral of the second kind in the *modulus* convention.

    ``E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 t) dt`` for ``0 <= k < 1``.
    """
    if not (0.0 <= k < 1.0):
        raise DomainError("E(k) needs 0 <= k < 1")
    m = k * k
    if m == 0.0:
        return 0.5 * math.pi
    return carlson_rf(0.0, 1.0 - m, 1.0) - m / 3.0 * carlson_rd(0.0, 1.0 - m, 1.0)


def elliptic_Pi(n, m):
    """Complete integral of the third kind.

    ``Pi(n, m) = int_0^{pi/2} dt / ((1 - n sin^2 t) sqrt(1 - m sin^2 t))``
    for ``n < 1`` and ``0 <= m < 1``.
    """
    if not (n < 1.0 and 0.0 <= m < 1.0):
        raise DomainError("Pi(n, m) needs n < 1 and 0 <= m < 1")
    if n == 0.0 and m == 0.0:
        return 0.5 * math.pi
    rf = carlson_rf(0.0, 1.0 - m, 1.0)
    if n == 0.0:
        return rf
    return rf + n / 3.0 * carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n)
