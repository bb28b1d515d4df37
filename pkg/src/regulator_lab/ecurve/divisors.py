"""Divisors of rational functions on a Weierstrass curve and the diamond pairing.

A polynomial F(X, Y) is first reduced modulo the curve to A(X) + B(X) Y.
The common factor g = gcd(A, B) is a product of vertical lines, each
contributing both points above its root. What is left, A' + B' Y with
coprime A', B', vanishes at exactly one point above every root of its
norm, and the order there equals the root's multiplicity. Factorisation
is exact (sympy over Q); irrational roots become numeric points.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import mpmath
import sympy

from ..polyfam import LaurentPoly, parse_poly
from .curves import (
    DEFAULT_DPS,
    CurvePoint,
    WeierstrassCurve,
    _close,
    _mp,
    negate,
    point_S,
    point_T,
    point_U,
    sub,
)
from .lattice import PeriodLattice, elliptic_log, periods

CURVE_VARS = ("X", "Y")
CLASS_TOL = 1e-9

_X, _Y = sympy.symbols("X Y")


class ZeroFunctionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

def _to_sympy(p: LaurentPoly):
    if any(e < 0 for exps, _ in p for e in exps):
        raise ValueError("functions on a curve must be polynomial in X, Y")
    names = dict(zip(p.vars, (_X, _Y)))
    expr = sympy.Integer(0)
    for exps, c in p:
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in zip(p.vars, exps):
            term *= names[v] ** e
        expr += term
    return expr


@dataclass(frozen=True)
class RationalFunctionOnCurve:
    num: LaurentPoly
    den: LaurentPoly = field(default_factory=lambda: LaurentPoly.constant(1, CURVE_VARS))
    name: str | None = None

    @classmethod
    def parse(cls, num: str, den: str = "1", name: str | None = None) -> "RationalFunctionOnCurve":
        return cls(parse_poly(num, vars=CURVE_VARS), parse_poly(den, vars=CURVE_VARS), name)

    def __mul__(self, other: "RationalFunctionOnCurve") -> "RationalFunctionOnCurve":
        return RationalFunctionOnCurve(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunctionOnCurve") -> "RationalFunctionOnCurve":
        return RationalFunctionOnCurve(self.num * other.den, self.den * other.num)

    def __pow__(self, n: int) -> "RationalFunctionOnCurve":
        if n < 0:
            return RationalFunctionOnCurve(self.den ** -n, self.num ** -n)
        return RationalFunctionOnCurve(self.num ** n, self.den ** n)

    def __call__(self, pt: CurvePoint):
        return self.num.evaluate(X=pt.x, Y=pt.y) / self.den.evaluate(X=pt.x, Y=pt.y)

    def __str__(self) -> str:
        return self.name or f"({self.num})/({self.den})"


def _reduce(expr, curve: WeierstrassCurve) -> tuple[sympy.Poly, sympy.Poly]:
    """A(X), B(X) with expr = A + B*Y modulo the curve equation."""
    a1, a2, a3, a4, a6 = (sympy.Rational(c.numerator, c.denominator) for c in curve.ainvs)
    eq = _Y ** 2 + a1 * _X * _Y + a3 * _Y - (_X ** 3 + a2 * _X ** 2 + a4 * _X + a6)
    rem = sympy.rem(sympy.Poly(expr, _Y, _X), sympy.Poly(eq, _Y, _X))
    rem = sympy.Poly(rem.as_expr(), _Y)
    coeffs = dict(zip((m[0] for m in rem.monoms()), rem.coeffs()))
    A = sympy.Poly(coeffs.get(0, 0), _X, domain="QQ")
    B = sympy.Poly(coeffs.get(1, 0), _X, domain="QQ")
    return A, B


def _fraction(c) -> Fraction:
    c = sympy.Rational(c)
    return Fraction(int(c.p), int(c.q))


def _rational_sqrt(c: Fraction) -> Fraction | None:
    if c < 0:
        return None
    n, d = isqrt(c.numerator), isqrt(c.denominator)
    if n * n == c.numerator and d * d == c.denominator:
        return Fraction(n, d)
    return None


def _roots(h: sympy.Poly, dps: int):
    """Roots of an irreducible factor: exact Fractions for linear ones."""
    if h.degree() == 1:
        c1, c0 = h.all_coeffs()
        return [-_fraction(c0) / _fraction(c1)]
    coeffs = [_mp(_fraction(c)) for c in h.all_coeffs()]
    return [mpmath.mpc(r) for r in mpmath.polyroots(coeffs, maxsteps=500, extraprec=4 * dps)]


def _points_above(curve: WeierstrassCurve, x0) -> list[CurvePoint]:
    """Both points with abscissa x0, a single one when it is 2-torsion."""
    a1, a2, a3, a4, a6 = curve.ainvs
    if isinstance(x0, Fraction):
        b = a1 * x0 + a3
        disc = b * b + 4 * (x0 ** 3 + a2 * x0 * x0 + a4 * x0 + a6)
        r = _rational_sqrt(disc)
        if r is not None:
            pts = [CurvePoint(x0, (-b + r) / 2), CurvePoint(x0, (-b - r) / 2)]
            return pts[:1] if r == 0 else pts
    p, q = curve.lift_x(x0)
    if abs(p.y - q.y) <= mpmath.mpf(10) ** (-(mpmath.mp.dps // 2)) * max(1, abs(p.y)):
        return [p]
    return [p, q]


# ---------------------------------------------------------------------------
# divisors
# ---------------------------------------------------------------------------

def same_point(p: CurvePoint, q: CurvePoint, tol=None) -> bool:
    if p.is_infinity or q.is_infinity:
        return p.is_infinity and q.is_infinity
    if p.exact and q.exact:
        return p.x == q.x and p.y == q.y
    tol = tol if tol is not None else mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    p, q = p.numeric(), q.numeric()
    return _close(p.x, q.x, tol) and _close(p.y, q.y, tol)


@dataclass(frozen=True)
class Divisor:
    """Formal sum of points; equal points are merged on construction."""

    terms: tuple[tuple[CurvePoint, int], ...] = ()

    def __post_init__(self):
        merged: list[list] = []
        for pt, m in self.terms:
            for entry in merged:
                if same_point(entry[0], pt):
                    entry[1] += m
                    break
            else:
                merged.append([pt, m])
        object.__setattr__(self, "terms", tuple((p, m) for p, m in merged if m != 0))

    @classmethod
    def of(cls, *pairs) -> "Divisor":
        return cls(tuple(pairs))

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.terms)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(self.terms + other.terms)

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((p, -m) for p, m in self.terms))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __mul__(self, n: int) -> "Divisor":
        return Divisor(tuple((p, n * m) for p, m in self.terms))

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def multiplicity(self, pt: CurvePoint) -> int:
        return sum(m for p, m in self.terms if same_point(p, pt))

    def equals(self, other: "Divisor") -> bool:
        return len(self - other) == 0

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{m}{p}" for p, m in self.terms).replace("+ -", "- ")


def _polynomial_divisor(F: LaurentPoly, curve: WeierstrassCurve, dps: int) -> Divisor:
    A, B = _reduce(_to_sympy(F), curve)
    if A.is_zero and B.is_zero:
        raise ZeroFunctionError(f"{F} vanishes identically on {curve}")
    terms: list[tuple[CurvePoint, int]] = []
    if B.is_zero:
        g, Ar, Br = A, sympy.Poly(1, _X, domain="QQ"), B
    else:
        g = sympy.gcd(A, B)
        Ar, Br = sympy.div(A, g)[0], sympy.div(B, g)[0]
    # vertical part: each root of g gives (P) + (-P)
    _, factors = g.factor_list()
    for h, e in factors:
        for x0 in _roots(h, dps):
            pts = _points_above(curve, x0)
            for pt in pts:
                terms.append((pt, e * (2 if len(pts) == 1 else 1)))
    # coprime part: one point above each root of the norm
    if not Br.is_zero:
        a1, a2, a3, a4, a6 = (sympy.Rational(c.numerator, c.denominator) for c in curve.ainvs)
        cubic = sympy.Poly(_X ** 3 + a2 * _X ** 2 + a4 * _X + a6, _X, domain="QQ")
        lin = sympy.Poly(a1 * _X + a3, _X, domain="QQ")
        norm = Ar * Ar - Ar * Br * lin - Br * Br * cubic
        if norm.degree() > 0:
            _, factors = norm.factor_list()
            for h, e in factors:
                for x0 in _roots(h, dps):
                    if isinstance(x0, Fraction):
                        y0 = -_fraction(Ar.eval(x0)) / _fraction(Br.eval(x0))
                        pt = CurvePoint(x0, y0)
                    else:
                        ax = mpmath.polyval([_mp(_fraction(c)) for c in Ar.all_coeffs()], x0)
                        bx = mpmath.polyval([_mp(_fraction(c)) for c in Br.all_coeffs()], x0)
                        pt = CurvePoint(x0, -ax / bx)
                    terms.append((pt, e))
    finite = sum(m for _, m in terms)
    if finite:
        terms.append((CurvePoint.infinity(), -finite))
    return Divisor(tuple(terms))


def divisor_of(f: RationalFunctionOnCurve | LaurentPoly, curve: WeierstrassCurve,
               dps: int = DEFAULT_DPS) -> Divisor:
    """Zeros minus poles of f on the curve, including the point at infinity."""
    if isinstance(f, LaurentPoly):
        f = RationalFunctionOnCurve(f.with_vars(CURVE_VARS) if f.vars != CURVE_VARS else f)
    with mpmath.workdps(dps):
        try:
            den = _polynomial_divisor(f.den, curve, dps)
        except ZeroFunctionError as exc:
            raise ZeroFunctionError(f"denominator of {f} vanishes on the curve") from exc
        return _polynomial_divisor(f.num, curve, dps) - den


# ---------------------------------------------------------------------------
# classes modulo (P) + (-P)
# ---------------------------------------------------------------------------

def _torus_dist(a, b) -> float:
    d = a - b
    return float(abs(d - mpmath.nint(d)))


class DivisorClass:
    """Element of Z[E(C)] modulo (P) + (-P); 2-torsion points and O vanish.

    Points are compared by their lattice coordinates (u/omega1 in
    (a, b) form, mod 1), so numeric and exact representatives of the same
    point agree. Each +-pair keeps the first representative seen.
    """

    def __init__(self, curve: WeierstrassCurve, lattice: PeriodLattice | None = None,
                 tol: float = CLASS_TOL):
        self.curve = curve
        self.lattice = lattice if lattice is not None else periods(curve)
        self.tol = tol
        self._entries: list[list] = []  # [point, (a, b), multiplicity]

    @classmethod
    def from_divisor(cls, d: Divisor, curve: WeierstrassCurve,
                     lattice: PeriodLattice | None = None) -> "DivisorClass":
        c = cls(curve, lattice)
        for pt, m in d:
            c._add_point(pt, m)
        return c

    def _coords(self, pt: CurvePoint):
        return self.lattice.coordinates(elliptic_log(pt, self.lattice))

    def _add_point(self, pt: CurvePoint, m: int, coords=None) -> None:
        if pt.is_infinity or m == 0:
            return
        a, b = coords if coords is not None else self._coords(pt)
        if _torus_dist(2 * a, 0) < self.tol and _torus_dist(2 * b, 0) < self.tol:
            return
        for entry in self._entries:
            ea, eb = entry[1]
            if _torus_dist(a, ea) < self.tol and _torus_dist(b, eb) < self.tol:
                entry[2] += m
                break
            if _torus_dist(a, -ea) < self.tol and _torus_dist(b, -eb) < self.tol:
                entry[2] -= m
                break
        else:
            self._entries.append([pt, (a, b), m])
        self._entries = [e for e in self._entries if e[2] != 0]

    def _copy(self) -> "DivisorClass":
        c = DivisorClass(self.curve, self.lattice, self.tol)
        c._entries = [list(e) for e in self._entries]
        return c

    @property
    def terms(self) -> list[tuple[CurvePoint, int]]:
        return [(e[0], e[2]) for e in self._entries]

    def coordinates(self) -> list[tuple[tuple, int]]:
        return [(e[1], e[2]) for e in self._entries]

    def is_zero(self) -> bool:
        return not self._entries

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        c = self._copy()
        for pt, coords, m in other._entries:
            c._add_point(pt, m, coords)
        return c

    def __neg__(self) -> "DivisorClass":
        c = self._copy()
        for e in c._entries:
            e[2] = -e[2]
        return c

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __mul__(self, n: int) -> "DivisorClass":
        c = self._copy()
        for e in c._entries:
            e[2] *= n
        c._entries = [e for e in c._entries if e[2] != 0]
        return c

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DivisorClass):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __str__(self) -> str:
        if not self._entries:
            return "0"
        return " + ".join(f"{m}{p}" for p, _, m in self._entries).replace("+ -", "- ")

    __repr__ = __str__


def diamond(d1: Divisor, d2: Divisor, curve: WeierstrassCurve,
            lattice: PeriodLattice | None = None) -> DivisorClass:
    """Sum of m_i n_j (S_i - T_j) over the two divisors, as a class."""
    if d1.degree or d2.degree:
        warnings.warn("diamond of divisors with nonzero degree", stacklevel=2)
    lattice = lattice if lattice is not None else periods(curve)
    out = DivisorClass(curve, lattice)
    for s, m in d1:
        for t, n in d2:
            out._add_point(sub(curve, s, t), m * n)
    return out


def class_of(terms, curve: WeierstrassCurve, lattice: PeriodLattice | None = None) -> DivisorClass:
    """Class of an explicit list of (point, multiplicity) pairs."""
    return DivisorClass.from_divisor(Divisor(tuple(terms)), curve, lattice)


# ---------------------------------------------------------------------------
# functions on E_k used by the regulator computation
# ---------------------------------------------------------------------------

def lemma_functions(k) -> dict[str, RationalFunctionOnCurve]:
    """a1, a2, b1, b2, x0, y0 and the composite a, b, y^2/x^4, (x+1)^2/x on E_k."""
    bind = {"k": Fraction(k)}

    def p(text):
        return parse_poly(text, bindings=bind, vars=CURVE_VARS)

    one = p("1")
    a1 = p("X - k + 4")
    a2 = p("X - 3*k + 12")
    b1 = p("X + k - 4")
    b2 = p("1/2*X^2 + (k^2 - 7*k + 12)*X + (k - 4)*Y + k^3 - 15/2*k^2 + 12*k + 8")
    den = p("(X + k)*(X + k - 4)")
    fns = {
        "a1": RationalFunctionOnCurve(a1, one, "a1"),
        "a2": RationalFunctionOnCurve(a2, one, "a2"),
        "b1": RationalFunctionOnCurve(b1, one, "b1"),
        "b2": RationalFunctionOnCurve(b2, one, "b2"),
        "x0": RationalFunctionOnCurve(p("(2*k - 8)*X + 2*k^2 - 8*k - 2*Y"), den, "x0"),
        "y0": RationalFunctionOnCurve(p("(2*k - 8)*X + 2*k^2 - 8*k + 2*Y"), den, "y0"),
        "a": RationalFunctionOnCurve(a1 * 2, a2, "a"),
        "b": RationalFunctionOnCurve(-(b1 ** 3), a2 * b2 * 18, "b"),
        "y2/x4": RationalFunctionOnCurve(b2 * b2 * 4, b1 ** 4, "y2/x4"),
        "(x+1)2/x": RationalFunctionOnCurve(p("4*(k - 4)"), b1, "(x+1)2/x"),
    }
    return fns


def expected_lemma_divisors(k) -> dict[str, Divisor]:
    """Divisors of a1, a2, b1, b2 in terms of T, U, S."""
    from .curves import curve as make_curve
    E = make_curve("Ek", k)
    O = CurvePoint.infinity()
    T, U, S = point_T(k), point_U(k), point_S(k)
    return {
        "a1": Divisor.of((T, 1), (negate(E, T), 1), (O, -2)),
        "a2": Divisor.of((U, 1), (negate(E, U), 1), (O, -2)),
        "b1": Divisor.of((S, 1), (negate(E, S), 1), (O, -2)),
        "b2": Divisor.of((S, 4), (O, -4)),
    }


def regulator_combination(k, lattice: PeriodLattice | None = None) -> DivisorClass:
    """-2(a1<>b1) + 2(a1<>a2) + 3(a2<>b1) - (b1<>b2) on E_k."""
    from .curves import curve as make_curve
    E = make_curve("Ek", k)
    lattice = lattice if lattice is not None else periods(E)
    fns = lemma_functions(k)
    div = {n: divisor_of(fns[n], E) for n in ("a1", "a2", "b1", "b2")}

    def dm(x, y):
        return diamond(div[x], div[y], E, lattice)

    return dm("a1", "b1") * -2 + dm("a1", "a2") * 2 + dm("a2", "b1") * 3 - dm("b1", "b2")
