"""Periods of the separated coordinates against independent quadratures."""

import io
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as si

from kext.dynsys import SQRT3_2, SQRT38, integrate
from kext.errors import DivergenceError, PreconditionError
from kext.periods import (T_U_SQRT38, T_V_LIMIT, TransformedQuintic, elliptic_Pi,
                          mesh_halving, moment, period_table, period_u, period_v,
                          periods, ratio, write_period_table, y_period)

RNG = np.random.default_rng(20261015)
below = st.floats(0.02, 0.85).filter(lambda p: abs(p - SQRT38) > 1e-3)


def _intervals(p, two=2.0, half=0.5, three_half=1.5, zero=0.0):
    # the coordinate ranges read off the sign pattern of the quintic
    a = two * p * p - three_half
    if p * p < 0.375:
        return (zero, half), (a, -two * p * p)
    if p < SQRT3_2:
        return (zero, half), (-two * p * p, a)
    return (a, half), (-three_half, zero)


def _mp_integral(p, which, power=0):
    with mp.workdps(40):
        pm = mp.mpf(p)
        # endpoints in extended precision: a rounded root costs sqrt(eps)
        u, v = _intervals(pm, mp.mpf(2), mp.mpf(1) / 2, mp.mpf(3) / 2, mp.mpf(0))
        lo, hi = u if which == "u" else v

        def f(s):
            val = s * (1 - 2 * s) * (3 + 2 * s) * (2 * pm**2 + s) * (3 - 4 * pm**2 + 2 * s)
            return s**power / mp.sqrt(abs(val))

        return float(2 * mp.quad(f, [lo, hi]))


# -- anchors ---------------------------------------------------------------

def test_t_u_closed_form_at_sqrt38():
    with mp.workdps(30):
        ref = float(mp.mpf(4) / 5 * mp.ellippi(mp.mpf(2) / 5, mp.mpf(1) / 4))
    assert T_U_SQRT38 == pytest.approx(ref, rel=1e-14)
    assert period_u(SQRT38).value == pytest.approx(ref, rel=1e-13)
    assert 0.8 * elliptic_Pi(0.4, 0.25) == pytest.approx(ref, rel=1e-14)


def test_t_v_limit_at_sqrt38():
    assert period_v(SQRT38).value == T_V_LIMIT
    # small-oscillation period of v about the double root -3/4
    with mp.workdps(30):
        p2 = mp.mpf(3) / 8
        P = lambda s: s * (1 - 2 * s) * (3 + 2 * s) * (2 * p2 + s) * (3 - 4 * p2 + 2 * s)
        d2 = mp.diff(P, mp.mpf(-3) / 4, 2)
        ref = float(2 * mp.pi / mp.sqrt(abs(d2) / 2))
    assert T_V_LIMIT == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("d", [1e-3, 1e-5, 1e-7])
def test_t_v_continuous_at_sqrt38(d):
    for p in (SQRT38 - d, SQRT38 + d):
        assert period_v(p).value == pytest.approx(T_V_LIMIT, rel=10 * d)
        assert period_v(p, method="q").value == pytest.approx(T_V_LIMIT, rel=10 * d)


@pytest.mark.parametrize("p", [0.1, 0.35, 0.5, 0.7, 0.8, 0.9, 0.97])
def test_periods_against_mpmath(p):
    assert period_u(p).value == pytest.approx(_mp_integral(p, "u"), rel=1e-12)
    assert period_v(p).value == pytest.approx(_mp_integral(p, "v"), rel=1e-12)


def test_t_u_double_root_at_one():
    # u-interval collapses onto s = 1/2: small-oscillation period
    with mp.workdps(30):
        P = lambda s: s * (1 - 2 * s) * (3 + 2 * s) * (2 + s) * (-1 + 2 * s)
        d2 = mp.diff(P, mp.mpf(1) / 2, 2)
        ref = float(2 * mp.pi / mp.sqrt(abs(d2) / 2))
    assert period_u(1.0).value == pytest.approx(ref, rel=1e-13)
    assert period_u(1.0 - 1e-6).value == pytest.approx(ref, rel=1e-5)
    assert period_v(1.0).value == pytest.approx(_mp_integral(1.0, "v"), rel=1e-12)


@pytest.mark.parametrize("p", [0.2, 0.55, 0.75, 0.95])
def test_moments_against_mpmath(p):
    assert moment(p, "u").value == pytest.approx(_mp_integral(p, "u", 1), rel=1e-12)
    assert moment(p, "v").value == pytest.approx(_mp_integral(p, "v", 1), rel=1e-12)


def test_moment_v_at_sqrt38():
    # v sits at -3/4 for all time
    assert moment(SQRT38, "v").value == -0.75 * T_V_LIMIT
    with pytest.raises(ValueError):
        moment(0.5, "w")


# -- the two routes for T_v ------------------------------------------------

@pytest.mark.parametrize("p", sorted(RNG.uniform(0.02, 0.86, 10)) + [0.4, 0.7])
def test_q_route_matches_direct(p):
    a = period_v(p).value
    b = period_v(p, method="q").value
    assert a == pytest.approx(b, rel=1e-9)


def test_q_route_against_qaws_in_s():
    # the same period straight from P(s) with the algebraic-weight rule
    for p in (0.4, 0.7):
        (lo, hi) = _intervals(p)[1]
        roots = [0.0, 0.5, -1.5, -2 * p * p, 2 * p * p - 1.5]
        others = [r for r in roots if min(abs(r - lo), abs(r - hi)) > 1e-15]
        f = lambda s: 1.0 / math.sqrt(8.0 * abs(np.prod([s - r for r in others])))
        ref, _ = si.quad(f, lo, hi, weight="alg", wvar=(-0.5, -0.5),
                         epsabs=0.0, epsrel=1e-13)
        assert period_v(p, method="q").value == pytest.approx(2 * ref, rel=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        period_v(0.5, method="romberg")


@pytest.mark.parametrize("p", sorted(RNG.uniform(0.01, 1.0, 20)))
def test_mesh_halving_within_error_estimate(p):
    for which in ("u", "v"):
        if which == "v" and abs(p - SQRT38) < 1e-9:
            continue
        delta, err = mesh_halving(p, which)
        assert delta <= max(err, 1e-14)


# -- transformed quintic ---------------------------------------------------

@given(below, st.floats(0.0, 0.5))
def test_transformed_quintic_is_image_of_p(p, r):
    Q = TransformedQuintic(p)
    c = 3 - 8 * p * p
    s = c * r - 1.5 + 2 * p * p
    P = -8 * s * (s - 0.5) * (s + 1.5) * (s + 2 * p * p) * (s - 2 * p * p + 1.5)
    assert Q(r) == pytest.approx(P / c**2, rel=1e-9, abs=1e-12)
    assert Q.cofactor(r) > 0
    assert np.polyval(Q.coefficients, r) == pytest.approx(Q(r), rel=1e-9, abs=1e-12)


def test_transformed_quintic_precondition():
    with pytest.raises(PreconditionError):
        TransformedQuintic(0.9)
    with pytest.raises(PreconditionError):
        TransformedQuintic(SQRT3_2)


# -- structure -------------------------------------------------------------

def test_t_v_exceeds_t_u_and_ratio_bounds():
    ps = np.linspace(0.005, 0.86, 300)
    rows = period_table(ps)
    t_u = np.array([r[1] for r in rows])
    t_v = np.array([r[2] for r in rows])
    R = np.array([r[3] for r in rows])
    assert np.all(t_v > t_u)
    assert np.all((R > 1) & (R < 2))


@given(st.floats(0.01, 0.86))
def test_ratio_symmetric_under_root_exchange(p):
    # p^2 -> 3/4 - p^2 permutes the roots -2p^2 and 2p^2 - 3/2
    q = math.sqrt(0.75 - p * p)
    if abs(q - SQRT3_2) < 1e-6 or abs(p - SQRT3_2) < 1e-6:
        return
    a, b = periods(p), periods(q)
    assert a.t_u == pytest.approx(b.t_u, rel=1e-12)
    assert a.t_v == pytest.approx(b.t_v, rel=1e-12)


@pytest.mark.parametrize("which", [period_u, period_v])
def test_divergence_grows_towards_zero(which):
    vals = [which(p).value for p in (1e-2, 1e-3, 1e-4)]
    assert vals[0] < vals[1] < vals[2]


def test_gap_grows_towards_zero():
    gaps = [period_v(p).value - period_u(p).value for p in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] < gaps[1] < gaps[2]


def test_small_p_against_mpmath():
    # the endpoint factors cancel under s = lo + w sin^2(t): 2 int dt / sqrt(C(s));
    # C varies on the scale of the nearby root, so the oracle splits there
    p = 1e-4
    with mp.workdps(40):
        pm = mp.mpf(p)
        cuts = [0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, mp.pi / 2]
        s_u = lambda t: mp.sin(t) ** 2 / 2
        C_u = lambda s: 2 * (3 + 2 * s) * (2 * pm**2 + s) * (3 - 4 * pm**2 + 2 * s)
        ref_u = float(4 * mp.quad(lambda t: 1 / mp.sqrt(C_u(s_u(t))), cuts))
        a, b = 2 * pm**2 - mp.mpf(3) / 2, -2 * pm**2
        s_v = lambda t: b - (b - a) * mp.sin(t) ** 2
        C_v = lambda s: 2 * abs(s) * (1 - 2 * s) * (3 + 2 * s)
        ref_v = float(4 * mp.quad(lambda t: 1 / mp.sqrt(C_v(s_v(t))), cuts))
    assert period_u(p).value == pytest.approx(ref_u, rel=1e-11)
    assert period_v(p).value == pytest.approx(ref_v, rel=1e-11)


@pytest.mark.parametrize("p", [1e-4, 1e-6, 1e-8])
def test_half_periods_grow_logarithmically_at_zero(p):
    # near s = 0, P ~ 9 s (s + 2p^2): each half-period ~ -(2/3) ln p
    assert 0.5 * period_u(p).value / (-2 / 3 * math.log(p)) == pytest.approx(1.0, abs=0.15)
    assert 0.5 * period_v(p).value / (-math.log(p)) == pytest.approx(1.0, abs=0.15)


@pytest.mark.parametrize("d", [1e-3, 1e-4, 1e-5])
def test_log_growth_near_critical(d):
    # full periods grow like -(2/3) ln d and -ln d as p -> sqrt(3)/2
    p = SQRT3_2 - d
    assert period_u(p).value / (-2 / 3 * math.log(d)) == pytest.approx(1.0, abs=0.1)
    assert period_v(p).value / (-math.log(d)) == pytest.approx(1.0, abs=0.1)


def test_errors():
    with pytest.raises(DivergenceError):
        period_u(SQRT3_2)
    with pytest.raises(DivergenceError):
        period_v(SQRT3_2)
    with pytest.raises(PreconditionError):
        ratio(0.9)
    with pytest.raises(PreconditionError):
        ratio(SQRT3_2)
    with pytest.raises(PreconditionError):
        y_period(0.5)


def test_ratio_error_propagation():
    est = ratio(0.4)
    pp = periods(0.4)
    assert est.value == pp.t_v / pp.t_u
    assert 0 < est.error < 1e-10


# -- y-period --------------------------------------------------------------

def test_y_period_returns_orbit(traj_sqrt38):
    # (phi1, phi2) repeats after 2Y
    Y = y_period(SQRT38).value
    s0 = traj_sqrt38(0.0)
    np.testing.assert_allclose(traj_sqrt38(2 * Y), s0, rtol=0, atol=1e-8)
    # and not at half that length: phi1 changes sign
    half = traj_sqrt38(Y)
    assert half[2] == pytest.approx(-s0[2], abs=1e-8)


def test_y_period_against_time_map(traj_sqrt38):
    # one period of u in tau corresponds to Y in y
    from kext.separation import reparameterize
    sep = reparameterize(traj_sqrt38)
    Y = y_period(SQRT38).value
    assert sep.tau_of_y(Y) == pytest.approx(period_u(SQRT38).value, rel=1e-9)


# -- tables ----------------------------------------------------------------

def test_period_table_threads_deterministic():
    ps = np.linspace(0.05, 0.85, 41)
    assert period_table(ps, threads=4) == period_table(ps, threads=1)


def test_period_table_near_sqrt38():
    ps = np.linspace(0.01, 0.86, 400)
    rows = period_table(ps)
    i = int(np.argmin(np.abs(ps - SQRT38)))
    tol = 4 * abs(ps[i] - SQRT38) + 1e-6
    assert rows[i][2] == pytest.approx(T_V_LIMIT, abs=tol)


def test_write_period_table():
    buf = io.StringIO()
    rows = period_table([0.3, 0.6])
    write_period_table(buf, rows)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "p,T_u,T_v,R,err_u,err_v"
    assert len(lines) == 3
    assert [float(x) for x in lines[1].split(",")] == list(rows[0])
