"""Long Weierstrass models, points and the chord-tangent group law.

Points with rational coordinates are kept exact (``Fraction``); anything
else is carried as ``mpmath.mpc`` at the working precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath
import sympy

from ..polyfam import as_rational

DEFAULT_DPS = 30
Number = Union[Fraction, mpmath.mpc, mpmath.mpf, complex, float, int]


class SingularCurveError(ValueError):
    pass


class OffCurveError(ValueError):
    pass


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with rational a_i."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    label: str | None = None
    # a singular cubic still has a group law on its smooth locus
    allow_singular: bool = False

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.discriminant == 0 and not self.allow_singular:
            raise SingularCurveError(f"singular curve {self.ainvs}")

    @property
    def is_singular(self) -> bool:
        return self.discriminant == 0

    @property
    def ainvs(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[Fraction, Fraction]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Fraction:
        c4, _ = self.c_invariants
        return c4 ** 3 / self.discriminant

    def change_coordinates(self, r=0, s=0, t=0, u=1) -> "WeierstrassCurve":
        """Model for x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""
        r, s, t, u = (as_rational(v) for v in (r, s, t, u))
        a1, a2, a3, a4, a6 = self.ainvs
        return WeierstrassCurve(
            (a1 + 2 * s) / u,
            (a2 - s * a1 + 3 * r - s * s) / u ** 2,
            (a3 + r * a1 + 2 * t) / u ** 3,
            (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u ** 4,
            (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) / u ** 6,
            self.label,
            self.allow_singular,
        )

    def residual(self, x, y):
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)

    def contains(self, pt: "CurvePoint", rtol: float = 1e-12) -> bool:
        if pt.is_infinity:
            return True
        res = self.residual(pt.x, pt.y)
        if pt.exact:
            return res == 0
        scale = max(1.0, float(abs(pt.x)) ** 3, float(abs(pt.y)) ** 2)
        return float(abs(res)) <= rtol * scale

    def lift_x(self, x) -> tuple["CurvePoint", "CurvePoint"]:
        """The two points with the given x-coordinate (equal for 2-torsion)."""
        a1, a2, a3, a4, a6 = (mpmath.mpf(c.numerator) / c.denominator for c in self.ainvs)
        x = mpmath.mpmathify(x)
        b = a1 * x + a3
        c = -(x ** 3 + a2 * x * x + a4 * x + a6)
        d = mpmath.sqrt(b * b - 4 * c)
        return CurvePoint(x, (-b + d) / 2), CurvePoint(x, (-b - d) / 2)

    def to_short(self, pt: "CurvePoint"):
        """Coordinates on y'^2 = 4x'^3 - g2 x' - g3."""
        if pt.is_infinity:
            raise ValueError("point at infinity has no affine short coordinates")
        b2 = self.b_invariants[0]
        return pt.x + _num(b2 / 12, pt), 2 * pt.y + _num(self.a1, pt) * pt.x + _num(self.a3, pt)

    def from_short(self, xs, ys) -> "CurvePoint":
        b2 = self.b_invariants[0]
        x = xs - mpmath.mpf(b2.numerator) / b2.denominator / 12
        y = (ys - _mp(self.a1) * x - _mp(self.a3)) / 2
        return CurvePoint(mpmath.mpc(x), mpmath.mpc(y))

    @property
    def g2_g3(self) -> tuple[Fraction, Fraction]:
        c4, c6 = self.c_invariants
        return c4 / 12, c6 / 216

    def __str__(self) -> str:
        return f"[{', '.join(str(a) for a in self.ainvs)}]" + (f" ({self.label})" if self.label else "")


def _mp(c: Fraction):
    return mpmath.mpf(c.numerator) / c.denominator


def _num(c: Fraction, pt: "CurvePoint"):
    return c if pt.exact else _mp(c)


@dataclass(frozen=True)
class CurvePoint:
    x: Number | None = None
    y: Number | None = None
    exact: bool = False

    def __post_init__(self):
        if self.x is None:
            object.__setattr__(self, "exact", True)
            return
        if isinstance(self.x, (int, Fraction)) and isinstance(self.y, (int, Fraction)):
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))
            object.__setattr__(self, "exact", True)
        else:
            object.__setattr__(self, "x", mpmath.mpc(_to_mp(self.x)))
            object.__setattr__(self, "y", mpmath.mpc(_to_mp(self.y)))
            object.__setattr__(self, "exact", False)

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls()

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def numeric(self) -> "CurvePoint":
        if self.is_infinity or not self.exact:
            return self
        return CurvePoint(mpmath.mpc(_mp(self.x)), mpmath.mpc(_mp(self.y)))

    def __str__(self) -> str:
        if self.is_infinity:
            return "O"
        if self.exact:
            return f"({self.x}, {self.y})"
        return f"({mpmath.nstr(self.x, 12)}, {mpmath.nstr(self.y, 12)})"


O = CurvePoint.infinity()


def _to_mp(v):
    if isinstance(v, Fraction):
        return _mp(v)
    return mpmath.mpmathify(v)


def _close(a, b, tol) -> bool:
    return abs(a - b) <= tol * max(1, abs(a), abs(b))


def _tol() -> mpmath.mpf:
    return mpmath.mpf(10) ** (-(mpmath.mp.dps * 2 // 3))


def is_singular_point(curve: WeierstrassCurve, pt: CurvePoint) -> bool:
    if pt.is_infinity or not curve.is_singular:
        return False
    a1, a2, a3, a4, _ = curve.ainvs if pt.exact else (_mp(c) for c in curve.ainvs)
    fx = a1 * pt.y - (3 * pt.x * pt.x + 2 * a2 * pt.x + a4)
    fy = 2 * pt.y + a1 * pt.x + a3
    return (fx == 0 and fy == 0) if pt.exact else (abs(fx) + abs(fy) < 1e-12)


def _check(curve: WeierstrassCurve, pt: CurvePoint) -> None:
    if not curve.contains(pt, rtol=1e-12 if not pt.exact else 0):
        raise OffCurveError(f"point {pt} is not on {curve}")
    if is_singular_point(curve, pt):
        raise OffCurveError(f"point {pt} is the singular point of {curve}")


def negate(curve: WeierstrassCurve, pt: CurvePoint) -> CurvePoint:
    if pt.is_infinity:
        return pt
    a1, a3 = _num(curve.a1, pt), _num(curve.a3, pt)
    return CurvePoint(pt.x, -pt.y - a1 * pt.x - a3)


def add(curve: WeierstrassCurve, p: CurvePoint, q: CurvePoint, check: bool = True) -> CurvePoint:
    if check:
        _check(curve, p)
        _check(curve, q)
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    exact = p.exact and q.exact
    if not exact:
        p, q = p.numeric(), q.numeric()
    a1, a2, a3, a4, _ = (c if exact else _mp(c) for c in curve.ainvs)
    same_x = p.x == q.x if exact else _close(p.x, q.x, _tol())
    if same_x:
        ysum = p.y + q.y + a1 * q.x + a3
        if (ysum == 0) if exact else abs(ysum) <= _tol() * max(1, abs(p.y)):
            return O
        lam = (3 * p.x * p.x + 2 * a2 * p.x + a4 - a1 * p.y) / (2 * p.y + a1 * p.x + a3)
    else:
        lam = (q.y - p.y) / (q.x - p.x)
    nu = p.y - lam * p.x
    x3 = lam * lam + a1 * lam - a2 - p.x - q.x
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def sub(curve: WeierstrassCurve, p: CurvePoint, q: CurvePoint) -> CurvePoint:
    return add(curve, p, negate(curve, q))


def mul(curve: WeierstrassCurve, n: int, pt: CurvePoint) -> CurvePoint:
    _check(curve, pt)
    if n < 0:
        return mul(curve, -n, negate(curve, pt))
    result, base = O, pt
    while n:
        if n & 1:
            result = add(curve, result, base, check=False)
        base = add(curve, base, base, check=False)
        n >>= 1
    return result


def torsion_order(curve: WeierstrassCurve, pt: CurvePoint, bound: int = 24) -> int | None:
    """Least n <= bound with n*pt = O, or None when the bound is exceeded."""
    _check(curve, pt)
    acc = pt
    for n in range(1, bound + 1):
        if acc.is_infinity:
            return n
        acc = add(curve, acc, pt, check=False)
    return None


# ---------------------------------------------------------------------------
# the families
# ---------------------------------------------------------------------------

_K = sympy.Symbol("k")
_FAMILY_AINVS = {
    "Ek": (0, _K ** 2 - 5 * _K + 8, 0, (-2 * _K ** 2 + 5 * _K + 4) * (4 - _K), (_K ** 2 + _K) * (4 - _K) ** 2),
    "Uk": (_K - 2, 0, _K, 0, 0),
    "Fk": (0, (_K - 4) ** 2 / 4 - 2, 0, 1, 0),
}


def singular_parameters(kind: str) -> list[Fraction]:
    """Rational k at which the family degenerates."""
    a = [sympy.sympify(c) for c in _FAMILY_AINVS[kind]]
    b2 = a[0] ** 2 + 4 * a[1]
    b4 = 2 * a[3] + a[0] * a[2]
    b6 = a[2] ** 2 + 4 * a[4]
    b8 = a[0] ** 2 * a[4] + 4 * a[1] * a[4] - a[0] * a[2] * a[3] + a[1] * a[2] ** 2 - a[3] ** 2
    disc = sympy.expand(-b2 ** 2 * b8 - 8 * b4 ** 3 - 27 * b6 ** 2 + 9 * b2 * b4 * b6)
    roots = sympy.Poly(disc, _K).ground_roots() if disc.free_symbols else {}
    return sorted(Fraction(int(r.p), int(r.q)) for r in roots if r.is_rational)


def curve(kind: str, k, allow_singular: bool = False) -> WeierstrassCurve:
    """E_k, U_k or F_k at a rational parameter.

    ``allow_singular`` admits a nodal or cuspidal model, for group-law
    questions on its smooth points (U_k at k = -1 is nodal).
    """
    if kind not in _FAMILY_AINVS:
        raise ValueError(f"unknown curve kind {kind!r}; expected Ek, Uk or Fk")
    k = as_rational(k)
    vals = []
    for c in _FAMILY_AINVS[kind]:
        v = sympy.sympify(c).subs(_K, sympy.Rational(k.numerator, k.denominator))
        vals.append(Fraction(int(v.p), int(v.q)))
    try:
        return WeierstrassCurve(*vals, label=f"{kind}(k={k})", allow_singular=allow_singular)
    except SingularCurveError:
        raise SingularCurveError(
            f"{kind} is singular at k={k}; singular parameters: {[str(b) for b in singular_parameters(kind)]}"
        ) from None


def point_P(k) -> CurvePoint:
    """(k, k) on U_k."""
    k = as_rational(k)
    return CurvePoint(k, k)


def point_S(k) -> CurvePoint:
    """(4 - k, 16 - 4k) on E_k."""
    k = as_rational(k)
    return CurvePoint(4 - k, 16 - 4 * k)


def point_T(k) -> CurvePoint:
    """(k - 4, 2(k - 4) sqrt(k^2 - 2k)) on E_k."""
    k = as_rational(k)
    km = _mp(k)
    return CurvePoint(mpmath.mpc(km - 4), 2 * (km - 4) * mpmath.sqrt(mpmath.mpc(km * km - 2 * km)))


def point_U(k) -> CurvePoint:
    """(3k - 12, 4(k - 4) sqrt(k^2 - 2k - 3)) on E_k."""
    k = as_rational(k)
    km = _mp(k)
    return CurvePoint(mpmath.mpc(3 * km - 12), 4 * (km - 4) * mpmath.sqrt(mpmath.mpc(km * km - 2 * km - 3)))
