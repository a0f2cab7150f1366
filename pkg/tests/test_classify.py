"""Rational detection, the periodic set, zero counts and shapes."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kext import periods as per
from kext.classify import (KIND_DECAYING, KIND_PERIODIC, KIND_PHI2_VANISHES, KIND_QUASI,
                           R_ENCLOSURE, SHAPE_AA, SHAPE_BB, SHAPE_CLOSED,
                           SHAPE_HYPERBOLA, classify, classify_periodic,
                           count_zeros_per_period, critical_points, detect_rational,
                           fractions_in, half_period_point, orbit_coverage,
                           phi2_vanishing, ratio_result, shape_for,
                           solve_ratio_equation)
from kext.dynsys import SQRT3_2, SQRT38, integrate
from kext.errors import PreconditionError
from kext.separation import quadrics


@pytest.fixture(scope="module")
def roots():
    return {f: solve_ratio_equation(f) for f in
            (Fraction(3, 2), Fraction(40, 27), Fraction(43, 29))}


# -- rational detection ----------------------------------------------------

@pytest.mark.parametrize("R, eps, cap, expected", [
    (1.5, 1e-12, 10_000, Fraction(3, 2)),
    (1.481481481, 1e-6, 10_000, Fraction(40, 27)),
    ((1 + math.sqrt(5)) / 2 - 0.11, 1e-12, 1000, None),
    (2.0, 1e-3, 1, Fraction(2)),
    (0.0004, 1e-3, 10, Fraction(0)),
])
def test_detect_rational_examples(R, eps, cap, expected):
    assert detect_rational(R, eps, cap) == expected


def _brute_force(R, eps, cap):
    x, e = Fraction(R), Fraction(eps)
    for m in range(1, cap + 1):
        for q in (math.floor(x * m), math.ceil(x * m)):
            if abs(Fraction(q, m) - x) <= e:
                return m
    return None


@given(st.floats(0.0, 3.0), st.floats(1e-7, 1e-2), st.integers(1, 300))
def test_detect_rational_minimal_denominator(R, eps, cap):
    got = detect_rational(R, eps, cap)
    m = _brute_force(R, eps, cap)
    if m is None:
        assert got is None
    else:
        assert got is not None and got.denominator == m
        assert abs(got - Fraction(R)) <= Fraction(eps)


def test_detect_rational_rejects_bad_eps():
    with pytest.raises(ValueError):
        detect_rational(1.5, 0.0)


def test_ratio_result_default_eps():
    rr = ratio_result(0.3)
    assert rr.eps >= 1e-12
    assert rr.certainty[0] < rr.R < rr.certainty[1]


# -- the equation R(p) = q/m -----------------------------------------------

def test_three_halves_roots_are_interior(roots):
    rs = roots[Fraction(3, 2)]
    assert len(rs) == 2
    assert rs == pytest.approx([0.42357, 0.75537], abs=1e-5)
    for p in rs:
        assert per.ratio(p).value == pytest.approx(1.5, abs=1e-10)


@pytest.mark.parametrize("frac", [Fraction(40, 27), Fraction(43, 29)])
def test_roots_pair_under_root_exchange(roots, frac):
    rs = roots[frac]
    assert len(rs) == 4
    for p in rs:
        assert per.ratio(p).value == pytest.approx(float(frac), abs=1e-10)
        partner = math.sqrt(0.75 - p * p)
        assert min(abs(partner - r) for r in rs) < 1e-9


@pytest.mark.parametrize("target", [Fraction(5, 2), 1.0, 1.47, 1.51])
def test_no_roots_outside_enclosure(target):
    assert solve_ratio_equation(target) == []


def test_ratio_enclosure_on_grid():
    R = [per.ratio(p).value for p in np.linspace(1e-3, SQRT3_2 - 1e-3, 200)]
    assert R_ENCLOSURE[0] <= min(R) and max(R) <= R_ENCLOSURE[1]


def test_fractions_in():
    fr = fractions_in(*R_ENCLOSURE, 50)
    assert len(fr) == 13
    assert fr[0] == Fraction(3, 2)
    keys = [(f.denominator, f.numerator) for f in fr]
    assert keys == sorted(keys)
    assert all(R_ENCLOSURE[0] <= f <= R_ENCLOSURE[1] for f in fr)
    assert fractions_in(1.6, 1.5, 10) == []


# -- zeros -----------------------------------------------------------------

def test_zero_count_sqrt38():
    zc = count_zeros_per_period(SQRT38)
    assert zc.zeros_phi1 == zc.predicted == 2
    assert zc.phi2_min ** 2 >= 0.375 - 1e-10
    assert zc.recurrence < 1e-8
    assert zc.period_y == pytest.approx(2 * per.y_period(SQRT38).value)


@pytest.mark.parametrize("frac, index", [(Fraction(3, 2), 0), (Fraction(40, 27), 1),
                                         (Fraction(43, 29), 2)])
def test_zero_count_matches_numerator(roots, frac, index):
    p = roots[frac][index]
    zc = count_zeros_per_period(p, frac)
    assert zc.zeros_phi1 == 2 * frac.numerator >= 6
    assert zc.recurrence < 1e-7
    assert zc.phi2_min > 0
    gaps = np.diff(zc.zero_locations)
    assert np.all(gaps > 0)


def test_zero_count_detects_fraction(roots):
    p = roots[Fraction(3, 2)][0]
    zc = count_zeros_per_period(p)
    assert zc.fraction == Fraction(3, 2)


def test_zero_count_preconditions():
    with pytest.raises(PreconditionError):
        count_zeros_per_period(0.9)
    with pytest.raises(PreconditionError):
        count_zeros_per_period(0.3)


@pytest.mark.parametrize("p", [0.88, 0.95, 1.0])
def test_phi2_vanishes_within_one_v_period(p):
    y0, tau0, t_v = phi2_vanishing(p)
    assert math.isfinite(y0) and tau0 < t_v
    traj = integrate(p, y0 + 0.1, 1e-12)
    assert abs(traj(y0)[1]) < 1e-10


def test_phi2_vanishing_precondition():
    with pytest.raises(PreconditionError):
        phi2_vanishing(0.5)
    with pytest.raises(PreconditionError):
        phi2_vanishing(SQRT3_2)


# -- shapes ----------------------------------------------------------------

def test_critical_points_sqrt38():
    cp = critical_points(SQRT38)
    r = 1 / math.sqrt(2)
    assert cp.A == pytest.approx((r, r), abs=1e-15)
    assert cp.A_prime == pytest.approx((-r, r), abs=1e-15)
    with pytest.raises(PreconditionError):
        critical_points(0.9)


@given(st.floats(0.01, 0.86))
def test_critical_points_on_unit_circle(p):
    cp = critical_points(p)
    for pt in (cp.A, cp.B, cp.A_prime, cp.B_prime):
        assert math.hypot(*pt) == pytest.approx(1.0, abs=1e-14)
    assert cp.B == cp.A[::-1]
    # all four sit on the boundary of the region Delta >= 0
    for pt in (cp.A, cp.B, cp.A_prime, cp.B_prime):
        assert abs(quadrics(*pt, p).delta) < 1e-12


@pytest.mark.parametrize("frac, shape", [(Fraction(3, 2), SHAPE_BB),
                                         (Fraction(40, 27), SHAPE_CLOSED),
                                         (Fraction(43, 29), SHAPE_AA)])
def test_shape_table_against_integration(roots, frac, shape):
    q, m = frac.numerator, frac.denominator
    for p in roots[frac]:
        assert shape_for(p, frac) == shape
        Y = per.y_period(p, q, m).value
        traj = integrate(p, Y, 1e-12)
        (u, v), pt = half_period_point(p, frac)
        np.testing.assert_allclose(np.abs(traj(Y / 2)[:2]), pt, atol=1e-8)
        cp = critical_points(p)
        target = {SHAPE_AA: cp.A, SHAPE_BB: cp.B,
                  SHAPE_CLOSED: (0.0, math.sqrt(0.75 - p * p))}[shape]
        np.testing.assert_allclose(pt, target, atol=1e-12)


def test_shape_at_sqrt38(traj_sqrt38):
    assert shape_for(SQRT38, None) == SHAPE_HYPERBOLA
    Y = per.y_period(SQRT38).value
    (_, v), pt = half_period_point(SQRT38, None)
    assert v == pytest.approx(-0.75)
    np.testing.assert_allclose(traj_sqrt38(Y / 2)[:2], pt, atol=1e-9)
    np.testing.assert_allclose(pt, critical_points(SQRT38).A, atol=1e-15)


# -- classification --------------------------------------------------------

def test_classify_special_points():
    assert classify(SQRT3_2).kind == KIND_DECAYING
    c = classify(0.95)
    assert c.kind == KIND_PHI2_VANISHES and c.phi2_positive is False
    c = classify(SQRT38)
    assert c.kind == KIND_PERIODIC and c.shape == SHAPE_HYPERBOLA
    assert c.zeros_phi1 == 2 and c.extremal_candidate
    assert c.R == pytest.approx(per.T_V_LIMIT / per.T_U_SQRT38, rel=1e-15)


def test_classify_quasi_periodic():
    c = classify(0.3)
    assert c.kind == KIND_QUASI and c.fraction is None
    assert not c.extremal_candidate


def test_classify_detects_periodic_root(roots):
    p = roots[Fraction(43, 29)][1]
    c = classify(p, eps=1e-9, denom_cap=100)
    assert c.kind == KIND_PERIODIC and c.fraction == Fraction(43, 29)
    assert c.zeros_phi1 == 86 and not c.extremal_candidate
    assert c.shape == SHAPE_AA


def test_classify_periodic_roots_fail_condition(roots):
    for frac, rs in roots.items():
        for p in rs:
            c = classify_periodic(p, frac)
            assert c.zeros_phi1 >= 6 and c.phi2_positive
            assert not c.extremal_candidate


def test_solution_class_json(roots):
    c = classify(roots[Fraction(3, 2)][0], eps=1e-9, count_zeros=False)
    d = json.loads(c.to_json())
    assert d["kind"] == KIND_PERIODIC and d["fraction"] == "3/2"
    assert set(d) >= {"p", "R", "period", "period_y", "zeros_phi1", "phi2_min",
                      "phi2_positive", "shape", "extremal_candidate"}


def test_quasi_periodic_orbit_fills_rectangle():
    cov, n = orbit_coverage(0.3)
    assert n >= 200
    assert cov > 0.95
