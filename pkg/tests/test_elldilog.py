from __future__ import annotations

import cmath

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from regulator_lab.ecurve import curve, elliptic_log, periods, point_S
from regulator_lab.elldilog import bloch_wigner, elliptic_dilog, elliptic_dilog_detail

coord = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, coord, coord).filter(lambda z: abs(z) > 1e-3 and abs(z - 1) > 1e-3)


def test_known_value():
    # D(e^{i pi/3}) is the maximum of D, 1.0149416064096536...
    assert bloch_wigner(cmath.exp(1j * cmath.pi / 3)) == pytest.approx(1.0149416064096536, abs=1e-14)


def test_real_axis_vanishes():
    assert bloch_wigner(0.3) == 0.0 and bloch_wigner(-4.0) == 0.0


@settings(max_examples=1000, deadline=None)
@given(cplx, cplx)
def test_five_term(x, y):
    if abs(1 - x * y) < 1e-3:
        return
    w = 1 - x * y
    total = bloch_wigner(x) + bloch_wigner(y) + bloch_wigner((1 - x) / w) + bloch_wigner(w) + bloch_wigner((1 - y) / w)
    assert abs(total) <= 1e-12


@settings(max_examples=1000, deadline=None)
@given(cplx)
def test_antisymmetries(z):
    d = bloch_wigner(z)
    assert abs(bloch_wigner(z.conjugate()) + d) <= 1e-12
    assert abs(bloch_wigner(1 / z) + d) <= 1e-12
    assert abs(bloch_wigner(1 - z) + d) <= 1e-12


@pytest.mark.parametrize("k", [-2, 20])
def test_elliptic_dilog_properties(k):
    L = periods(curve("Ek", k))
    u = mpmath.mpf("0.31") * L.omega1 + mpmath.mpf("0.17") * L.omega2
    d = elliptic_dilog(u, L)
    assert abs(elliptic_dilog(-u, L) + d) <= 1e-10
    assert abs(elliptic_dilog(u + L.omega1, L) - d) <= 1e-10
    assert abs(elliptic_dilog(u + L.omega2, L) - d) <= 1e-10
    for half in (L.omega1 / 2, L.omega2 / 2, (L.omega1 + L.omega2) / 2):
        assert abs(elliptic_dilog(half, L)) <= 1e-10


def test_tail_bound_reported():
    k = -5
    L = periods(curve("Ek", k))
    det = elliptic_dilog_detail(elliptic_log(point_S(k), L), L)
    assert det.tail_bound < 1e-15 and det.terms > 1
