import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given
from hypothesis import strategies as st

from elastoscat import specfun
from elastoscat.specfun import SpecialFunctionDomainError, bessel, gamma_bound_check, hankel1, incomplete_gamma

XS = np.geomspace(1e-3, 100, 400)


@pytest.mark.parametrize("kind,order,ref", [("J", 0, sp.j0), ("J", 1, sp.j1), ("Y", 0, sp.y0), ("Y", 1, sp.y1)])
def test_bessel_against_scipy(kind, order, ref):
    got = bessel(kind, order, XS)
    want = ref(XS)
    # relative error, with an absolute floor near the zeros
    err = np.abs(got - want) / np.maximum(np.abs(want), 1e-3 / np.sqrt(XS + 1))
    assert err.max() <= 1e-8


def test_j0_at_origin():
    assert bessel("J", 0, 0.0) == 1.0
    assert bessel("J", 1, 0.0) == 0.0


def _wronskian(x):
    j0, j1 = bessel("J", 0, x), bessel("J", 1, x)
    y0, y1 = bessel("Y", 0, x), bessel("Y", 1, x)
    # J0' = -J1, Y0' = -Y1
    return -j0 * y1 + j1 * y0


def test_wronskian_at_one():
    assert _wronskian(1.0) == pytest.approx(2 / math.pi, abs=1e-12)


def test_wronskian_range():
    x = np.linspace(0.1, 50, 2000)
    assert np.max(np.abs(_wronskian(x) - 2 / (math.pi * x))) <= 1e-8


def _series_j0(x, terms=50):
    return math.fsum((-1) ** k * (x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


def test_j0_first_zero_by_bisection():
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bessel("J", 0, lo) * bessel("J", 0, mid) <= 0:
            hi = mid
        else:
            lo = mid
    # refine the oracle with the 50-term series
    a, b = 2.0, 3.0
    for _ in range(60):
        m = 0.5 * (a + b)
        if _series_j0(a) * _series_j0(m) <= 0:
            b = m
        else:
            a = m
    assert abs(lo - a) <= 1e-7
    assert a == pytest.approx(2.404825557695773, abs=1e-10)


def test_bessel_recurrence():
    x = np.linspace(0.1, 50, 1000)
    h = 1e-5
    dj1 = (bessel("J", 1, x + h) - bessel("J", 1, x - h)) / (2 * h)
    assert np.max(np.abs(dj1 - (bessel("J", 0, x) - bessel("J", 1, x) / x))) <= 1e-7


def test_seam_continuity():
    s = specfun.SERIES_SWITCH
    for kind in "JY":
        for order in (0, 1):
            left = bessel(kind, order, np.nextafter(s, 0))
            right = bessel(kind, order, s)
            assert abs(left - right) <= 1e-9


def test_bessel_domain_errors():
    with pytest.raises(SpecialFunctionDomainError):
        bessel("Y", 0, 0.0)
    with pytest.raises(SpecialFunctionDomainError):
        bessel("J", 0, -1.0)
    with pytest.raises(ValueError):
        bessel("J", 2, 1.0)
    with pytest.raises(SpecialFunctionDomainError):
        hankel1(0, 0.0)


def test_hankel_definition():
    x = np.linspace(0.01, 40, 300)
    for n in (0, 1):
        assert np.array_equal(hankel1(n, x), bessel("J", n, x) + 1j * bessel("Y", n, x))


def test_hankel_modulus_asymptote():
    assert abs(abs(hankel1(0, 50.0)) * math.sqrt(50.0) - math.sqrt(2 / math.pi)) <= 1e-2


def test_hankel_log_singularity():
    assert hankel1(0, 1e-3).imag < -1


@given(st.floats(0.05, 80.0))
def test_hankel_scipy_property(x):
    assert abs(hankel1(1, x) - sp.hankel1(1, x)) <= 1e-8 * max(1.0, abs(sp.hankel1(1, x)))


@pytest.mark.parametrize(
    "s,x,lower,upper",
    [
        (1.0, 1.0, 1 - math.exp(-1), math.exp(-1)),
        (2.0, 1.0, 1 - 2 * math.exp(-1), 2 * math.exp(-1)),
        (3.0, 4.0, 2 - 26 * math.exp(-4), 26 * math.exp(-4)),
    ],
)
def test_incomplete_gamma_closed_forms(s, x, lower, upper):
    g = incomplete_gamma(s, x)
    assert g.lower == pytest.approx(lower, rel=1e-10)
    assert g.upper == pytest.approx(upper, rel=1e-10)


@given(st.floats(0.1, 8.0), st.floats(0.0, 60.0))
def test_incomplete_gamma_pair(s, x):
    g = incomplete_gamma(s, x)
    assert g.lower >= 0 and g.upper >= 0
    assert g.lower + g.upper == pytest.approx(math.gamma(s), rel=1e-10)
    assert g.lower == pytest.approx(sp.gammainc(s, x) * math.gamma(s), rel=1e-9, abs=1e-300)
    if sp.gammaincc(s, x) > 1e-250:
        assert g.upper == pytest.approx(sp.gammaincc(s, x) * math.gamma(s), rel=1e-9)


def test_incomplete_gamma_monotone():
    xs = np.arange(0, 50.5, 0.5)
    for s in np.arange(0.5, 6.5, 0.5):
        lo = [incomplete_gamma(s, x).lower for x in xs]
        up = [incomplete_gamma(s, x).upper for x in xs]
        assert np.all(np.diff(lo) >= -1e-15)
        assert np.all(np.diff(up) <= 1e-15)


def test_incomplete_gamma_domain():
    with pytest.raises(SpecialFunctionDomainError):
        incomplete_gamma(0.0, 1.0)
    with pytest.raises(SpecialFunctionDomainError):
        incomplete_gamma(1.0, -0.5)


def test_gamma_bound_examples():
    r = gamma_bound_check(1.0, 1.0)
    assert r.holds_lower and r.holds_upper
    assert r.slack == pytest.approx(2 * math.exp(-0.5) - math.exp(-1), abs=1e-10)
    r = gamma_bound_check(3.0, 4.0)
    assert r.holds_upper and r.slack == pytest.approx(16 * math.exp(-2) - 26 * math.exp(-4), abs=1e-10)


def test_gamma_bound_grid():
    for s in np.arange(0.5, 6.5, 0.5):
        for x in np.arange(0, 50.5, 0.5):
            r = gamma_bound_check(s, x)
            assert r.holds_lower and r.holds_upper, (s, x)
