import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from gibbstree.errors import DomainError
from gibbstree.model import ModelParams
from gibbstree.reduced import (
    FixedPointKind,
    alt_sum_identity,
    axis_fixed_points,
    classify_positive,
    enumerate_fixed_points,
    poly_coeffs,
    positivity_bound,
    recover_xy,
    series_eval,
    solve_z0,
    theta_threshold,
    v_apply,
    v_residual,
)

K = FixedPointKind
GRID_THETAS = np.linspace(0.0, 0.99, 20)
GRID = [(k, n) for k in range(2, 9) for n in range(5)]

params_st = st.builds(
    ModelParams,
    k=st.integers(2, 8),
    n=st.integers(0, 4),
    theta=st.floats(0.0, 0.99, allow_nan=False),
)


def v_by_quadrature(params, x, y):
    """H_k of x + y theta g, read off in the (1, theta g) basis by adaptive quadrature."""
    m, th = params.m, params.theta

    def g(u):
        v = 4.0 * u - 2.0
        return math.copysign(abs(v) ** (1.0 / m), v)

    def piece(f):
        a = integrate.quad(f, 0.0, 0.5, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        b = integrate.quad(f, 0.5, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return a + b

    A = piece(lambda u: (x + y * th * g(u)) ** params.k)
    B = piece(lambda u: g(u) * (x + y * th * g(u)) ** params.k)
    return A, 2.0 ** (-2.0 / m) * B


# series_eval

def test_series_at_zero():
    for k, n in [(2, 0), (3, 1), (6, 4)]:
        assert series_eval(ModelParams(k, n, 0.7), 0.0) == (0.0, 1.0)


@pytest.mark.parametrize("z", [0.0, 0.1, 0.37, -0.8, 1.3])
def test_series_k2_hand_expansion(z):
    f1, f2 = series_eval(ModelParams(2, 1, 0.9), z)
    assert f1 == pytest.approx(1.2 * z, rel=1e-15, abs=1e-300)
    assert f2 == pytest.approx(1.0 + 0.6 * 2.0 ** (2 / 3) * z * z, rel=1e-15)


@given(params=params_st, z=st.floats(-2.0, 2.0, allow_nan=False))
def test_series_parity(params, z):
    f1, f2 = series_eval(params, z)
    g1, g2 = series_eval(params, -z)
    assert g1 == -f1
    assert g2 == f2


# v_apply

@given(params=params_st)
def test_v_trivial_points(params):
    assert v_apply(params, 1.0, 0.0) == (1.0, 0.0)
    assert v_apply(params, 0.0, 0.0) == (0.0, 0.0)
    if params.k % 2:
        assert v_apply(params, -1.0, 0.0) == (-1.0, 0.0)


@pytest.mark.parametrize(
    "k,n,theta,x,y",
    [(2, 1, 0.9, 0.7, 0.4), (3, 0, 0.5, 1.1, -0.3), (4, 2, 0.95, 0.8, 0.5), (5, 1, 0.3, -0.6, 0.2)],
)
def test_v_matches_integral_definition(k, n, theta, x, y):
    p = ModelParams(k, n, theta)
    got = v_apply(p, x, y)
    want = v_by_quadrature(p, x, y)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_v_residual_is_sup_norm():
    p = ModelParams(2, 1, 0.9)
    xp, yp = v_apply(p, 0.7, 0.4)
    assert v_residual(p, 0.7, 0.4) == max(abs(xp - 0.7), abs(yp - 0.4))


# thresholds

@pytest.mark.parametrize("k,n", GRID)
def test_threshold_i1_is_theta_c(k, n):
    assert theta_threshold(k, n, 1) == (2 * n + 3) / (k * (2 * n + 1))


def test_threshold_example():
    assert theta_threshold(4, 0, 3) == 2.5


@pytest.mark.parametrize("k,n", GRID)
def test_thresholds_increase(k, n):
    values = [theta_threshold(k, n, i) for i in range(1, k + 1, 2)]
    assert all(a < b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("i", [0, 2, -1, 5])
def test_threshold_rejects_bad_index(i):
    with pytest.raises(DomainError):
        theta_threshold(4, 0, i)


# root polynomial

def test_poly_coeffs_example():
    pc = poly_coeffs(ModelParams(4, 0, 0.9))
    got = dict(pc.terms())
    assert sorted(got) == [1, 3, 5]
    assert got[1] == pytest.approx(-0.2, rel=1e-14)
    assert got[3] == pytest.approx(5.12, rel=1e-14)
    assert got[5] == pytest.approx(3.2, rel=1e-14)
    assert pc.sign_changes == 1


@given(params=params_st, z=st.floats(-1.5, 1.5, allow_nan=False))
def test_poly_matches_series_form(params, z):
    f1, f2 = series_eval(params, z)
    direct = z * f2 - params.theta * f1
    pc = poly_coeffs(params)
    assert abs(pc(z) - direct) <= 1e-13 * max(1.0, pc.scale(z))


@pytest.mark.parametrize("k,n", GRID)
def test_poly_sign_structure(k, n):
    p0 = ModelParams(k, n, 0.5)
    for theta in GRID_THETAS:
        p = p0.with_theta(float(theta))
        pc = poly_coeffs(p)
        coeffs = [r for _, r in pc.terms()]
        assert coeffs[-1] > 0
        assert pc.sign_changes == (1 if theta > p.theta_c else 0)
        if theta < p.theta_c:
            assert all(r > 0 for r in coeffs)
        nonzero = [r for r in coeffs if r != 0]
        flips = sum(a * b < 0 for a, b in zip(nonzero, nonzero[1:]))
        assert flips <= 1


@pytest.mark.parametrize("k,n", [(k, n) for k, n in GRID if (2 * n + 3) / (k * (2 * n + 1)) < 1])
def test_poly_degree_one_vanishes_at_theta_c(k, n):
    pc = poly_coeffs(ModelParams(k, n, theta_threshold(k, n, 1)))
    assert dict(pc.terms())[1] == 0.0
    assert pc.sign_changes == 0


# root solving

def test_solve_subcritical_absent():
    assert solve_z0(ModelParams(2, 1, 0.5)) is None
    assert solve_z0(ModelParams(2, 1, 5 / 6)) is None


def test_solve_k2_closed_form():
    z0 = solve_z0(ModelParams(2, 1, 0.9))
    assert z0 == pytest.approx(2.0 ** (-1 / 3) * math.sqrt(1.8 - 5 / 3), rel=0, abs=1e-10)
    assert z0 == pytest.approx(0.28981845, abs=1e-8)


def test_solve_k4_quadratic_in_w():
    z0 = solve_z0(ModelParams(4, 0, 0.9))
    w = (-5.12 + math.sqrt(28.7744)) / 6.4
    assert z0 == pytest.approx(math.sqrt(w), abs=1e-12)
    assert z0 == pytest.approx(0.19532724, abs=1e-8)


@pytest.mark.parametrize("k,n", GRID)
def test_solve_grid_invariants(k, n):
    bound = 2.0 ** (-1.0 / (2 * n + 1))
    for theta in GRID_THETAS:
        p = ModelParams(k, n, float(theta))
        pc = poly_coeffs(p)
        assert pc(bound) > 0
        z0 = solve_z0(p)
        if theta <= p.theta_c:
            assert z0 is None
            continue
        assert 0 < z0 < bound
        assert abs(pc(z0)) <= 1e-10 * pc.scale(z0)
        assert pc(-z0) == -pc(z0)
        assert abs(pc(-z0)) <= 1e-10 * pc.scale(z0)


@pytest.mark.parametrize("k,n", [(2, 1), (4, 0), (5, 3), (8, 4)])
@pytest.mark.parametrize("eps", [1e-4, 1e-7, 1e-10])
def test_solve_just_above_threshold(k, n, eps):
    theta_c = theta_threshold(k, n, 1)
    if theta_c + eps >= 1:
        pytest.skip("threshold unreachable")
    p = ModelParams(k, n, theta_c + eps)
    z0 = solve_z0(p)
    assert z0 is not None and 0 < z0 < 10 * math.sqrt(eps)
    x0, y0 = recover_xy(p, z0)
    assert v_residual(p, x0, y0) <= 1e-9


# recovery

def test_recover_k2_example():
    p = ModelParams(2, 1, 0.9)
    z0 = solve_z0(p)
    x0, y0 = recover_xy(p, z0)
    f1, f2 = series_eval(p, z0)
    assert x0 == pytest.approx(1 / f2, rel=1e-14)
    assert y0 == pytest.approx(f1 / f2**2, rel=1e-14)
    assert (x0, y0) == pytest.approx((0.92592593, 0.29816713), abs=1e-8)
    assert v_residual(p, x0, y0) <= 1e-9


@pytest.mark.parametrize("k,n", GRID)
def test_recover_identities(k, n):
    for theta in GRID_THETAS:
        p = ModelParams(k, n, float(theta))
        z0 = solve_z0(p)
        if z0 is None:
            continue
        x0, y0 = recover_xy(p, z0)
        assert x0 > 0 and y0 > 0
        assert p.theta * y0 / x0 == pytest.approx(z0, rel=1e-12)
        assert v_residual(p, x0, y0) <= 1e-9


def test_recover_rejects_nonpositive():
    with pytest.raises(DomainError):
        recover_xy(ModelParams(2, 1, 0.9), 0.0)


# enumeration and classification

def test_enumerate_examples():
    assert len(enumerate_fixed_points(ModelParams(4, 1, 0.3))) == 2
    pts = enumerate_fixed_points(ModelParams(3, 1, 0.95))
    assert len(pts) == 7
    assert {p.kind for p in pts} == {
        K.origin, K.unit, K.negated_unit, K.branch_pp, K.branch_mm, K.branch_pm, K.branch_mp,
    }
    for theta in (0.0, 0.5, 0.99):
        assert len(enumerate_fixed_points(ModelParams(2, 0, theta))) == 2


@pytest.mark.parametrize("k,n", GRID)
def test_enumerate_counts_and_positivity(k, n):
    for theta in GRID_THETAS:
        p = ModelParams(k, n, float(theta))
        pts = enumerate_fixed_points(p)
        above = theta > p.theta_c
        want = {(0, False): 2, (0, True): 4, (1, False): 3, (1, True): 7}[(k % 2, bool(above))]
        assert len(pts) == want
        positive = {q.kind for q in pts if q.positive_law}
        assert positive == ({K.unit, K.branch_pp, K.branch_pm} if above else {K.unit})
        for q in pts:
            assert v_residual(p, q.x, q.y) <= 1e-9


def test_equality_at_threshold_is_uniqueness():
    p = ModelParams(2, 1, theta_threshold(2, 1, 1))
    assert len(enumerate_fixed_points(p)) == 2


@pytest.mark.parametrize("k,n,theta", [(2, 1, 0.9), (4, 0, 0.9), (6, 2, 0.8), (8, 4, 0.99)])
def test_scale_uniqueness_even_k(k, n, theta):
    p = ModelParams(k, n, theta)
    x0, y0 = recover_xy(p, solve_z0(p))
    for c in (-1.0, 0.5, 2.0):
        assert v_residual(p, c * x0, c * y0) > 1e-3


def test_classify_examples():
    p = ModelParams(2, 1, 0.9)
    x0, y0 = recover_xy(p, solve_z0(p))
    assert classify_positive(p, (1.0, 0.0))
    assert not classify_positive(p, (-1.0, 0.0))
    assert classify_positive(p, (x0, -y0))
    assert not classify_positive(p, (0.0, 0.0))
    # |z| equal to the bound makes phi vanish at an endpoint
    assert not classify_positive(p, (1.0, positivity_bound(p) / p.theta))


def test_positivity_bound_value():
    assert positivity_bound(ModelParams(2, 1, 0.5)) == 2.0 ** (-1 / 3)


@pytest.mark.parametrize("k,n,theta", [(3, 1, 0.95), (3, 0, 0.5), (5, 2, 0.2), (7, 4, 0.99)])
def test_axis_fixed_points_odd_k(k, n, theta):
    p = ModelParams(k, n, theta)
    pts = axis_fixed_points(p)
    assert [q.kind for q in pts] == [K.axis_plus, K.axis_minus]
    for q in pts:
        assert q.x == 0.0 and not q.positive_law
        assert v_residual(p, q.x, q.y) <= 1e-12 * abs(q.y)
        assert v_by_quadrature(p, q.x, q.y) == pytest.approx((q.x, q.y), rel=1e-9, abs=1e-12)
    assert len(enumerate_fixed_points(p, include_axis=True)) == len(enumerate_fixed_points(p)) + 2


def test_axis_fixed_points_value():
    q = axis_fixed_points(ModelParams(3, 1, 0.95))[0]
    assert q.y == pytest.approx(1.30936, abs=1e-5)


def test_axis_fixed_points_absent():
    assert axis_fixed_points(ModelParams(4, 1, 0.9)) == []
    assert axis_fixed_points(ModelParams(3, 1, 0.0)) == []


# exact identity

def test_alt_sum_examples():
    assert alt_sum_identity(1, 1) == (Fraction(1, 6), Fraction(1, 6))
    assert alt_sum_identity(2, 1) == (Fraction(1, 12), Fraction(1, 12))
    lhs, rhs = alt_sum_identity(20, 21)
    assert lhs == rhs and lhs > 0


@pytest.mark.parametrize("k,m", [(1, 1), (3, 5), (6, 3), (9, 9)])
def test_alt_sum_matches_beta_integral(k, m):
    t = sympy.symbols("t")
    beta = sympy.integrate(t**m * (1 - t) ** k, (t, 0, 1))
    lhs, _ = alt_sum_identity(k, m)
    assert sympy.Rational(lhs.numerator, lhs.denominator) == beta


@pytest.mark.parametrize("k,m", [(0, 1), (2, 2), (2, 0), (2, -1)])
def test_alt_sum_rejects(k, m):
    with pytest.raises(DomainError):
        alt_sum_identity(k, m)


def test_alt_sum_overflow_guard():
    with pytest.raises(OverflowError):
        alt_sum_identity(3000, 2999)
