from __future__ import annotations

from fractions import Fraction

import pytest

from regulator_lab.polyfam import (
    ExponentOverflowError, LaurentPoly, ParseError, UnboundParameterError,
    as_rational, family, is_reciprocal, is_tempered, newton_faces, parse_poly, substitute_shift,
)


def test_parse_roundtrip():
    p = parse_poly("x + x^-1 + y + y^-1 + 3/2")
    assert parse_poly(str(p)) == p
    assert p.coefficient((0, 0)) == Fraction(3, 2)


def test_parameter_binding_is_exact():
    p = parse_poly("(x+1)*(y+1)*(x+y) - k*x*y", {"k": Fraction(7, 3)})
    assert p.coefficient((1, 1)) == 2 - Fraction(7, 3)


@pytest.mark.parametrize("text,err", [("x + k", UnboundParameterError), ("x^100000", ExponentOverflowError),
                                      ("x + * y", ParseError), ("(x + y", ParseError)])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_poly(text)


def test_float_rejected():
    with pytest.raises((TypeError, ValueError)):
        as_rational(0.1)


def test_shift_matches_direct_expansion():
    k = Fraction(-3)
    q = family("Q", k)
    x = LaurentPoly.var("x")
    y = LaurentPoly.var("y")
    xs = x - 1
    direct = y ** 2 + (xs ** 4 + k * xs ** 3 + 2 * k * xs ** 2 + k * xs + 1) * y + xs ** 4
    assert substitute_shift(q, "x", -1) == direct
    assert family("Qshift", k) == direct


def test_family_shapes():
    assert is_reciprocal(family("R", -2))
    assert is_tempered(family("P", 20))
    assert newton_faces(family("R", 5))
