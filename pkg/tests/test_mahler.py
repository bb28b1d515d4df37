from __future__ import annotations

import math

import numpy as np
import pytest

from regulator_lab.mahler import (
    PathSingularityError, deninger_path, loop_differential_integral, mahler_1d, mahler_2d, mahler_riemann,
    real_axis_crossings, s_of_t, torus_intersections, u_of_t,
)
from regulator_lab.polyfam import LaurentPoly, family, parse_poly

# m(1 + x + y) = 3 sqrt(3) L(chi_-3, 2) / (4 pi)
SMYTH = 0.3230659472194505


def test_one_variable_jensen():
    # 3 - 7x + 2x^2 = (2x - 1)(x - 3)
    assert mahler_1d(LaurentPoly.from_univariate([3, -7, 2])) == pytest.approx(math.log(6), abs=1e-14)


@pytest.mark.parametrize("text,expected", [("x + y + 2", math.log(2)), ("1 + x + y", SMYTH)])
def test_closed_forms(text, expected):
    assert mahler_2d(parse_poly(text)).value == pytest.approx(expected, abs=1e-10)


def test_variable_choice_agrees():
    p = family("P", 20)
    assert mahler_2d(p, var="x").value == pytest.approx(mahler_2d(p, var="y").value, abs=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("poly", [parse_poly("1 + x + y"), family("R", -2), family("Qshift", 20)])
def test_against_riemann_oracle(poly):
    assert abs(mahler_2d(poly).value - mahler_riemann(poly, n=1_000_000)) <= 1e-5


def test_qshift_meets_torus_at_one_minus_one():
    pts = torus_intersections(family("Qshift", -5))
    assert len(pts) == 1
    x, y = pts[0]
    assert abs(x - 1) < 1e-9 and abs(y + 1) < 1e-9
    assert deninger_path(family("Qshift", -5)).closed


def test_loop_integral_vanishes_for_negative_k():
    assert abs(loop_differential_integral("f1_pullback_omega1", -5).value) < 1e-8


def test_singular_loop_raises():
    with pytest.raises(PathSingularityError):
        loop_differential_integral("omega1_P", -1)


def test_u_crossings_closed_form():
    got = real_axis_crossings(u_of_t)
    assert [t for t, _ in got] == pytest.approx([1 / 6, 0.5, 5 / 6], abs=1e-10)
    assert [v for _, v in got] == pytest.approx([-0.5, -1.25, -0.5], abs=1e-10)


def test_s_crossings_closed_form():
    k = 20
    got = real_axis_crossings(lambda t: s_of_t(t, k))
    vals = np.array([v for _, v in got])
    assert vals == pytest.approx([(k + 2) ** 2 / 16, (k * k - 2 * k + 25) / 16, (k + 2) ** 2 / 16], rel=1e-10)
