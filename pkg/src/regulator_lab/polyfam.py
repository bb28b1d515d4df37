"""Exact Laurent polynomials, a small text parser and the polynomial families.

Coefficients are :class:`fractions.Fraction` throughout; the parameter ``k``
is substituted when a polynomial is built, so every downstream object
(resultants, divisors, face polynomials) stays exact.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _upoly

Rational = Fraction

MAX_EXPONENT = 10_000

DEFAULT_VARS = ("x", "y")
DEFAULT_ALIASES = {
    "x0": "x", "x1": "x", "x2": "x",
    "y0": "y", "y1": "y", "y2": "y",
}


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnboundParameterError(ParseError):
    pass


class ExponentOverflowError(ParseError):
    pass


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and rational strings ("3/2", "-7") to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals; pass a string or Fraction")
    return Fraction(value)


class LaurentPoly:
    """Immutable multivariate Laurent polynomial with rational coefficients."""

    __slots__ = ("_terms", "_vars", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | Iterable = (), vars: Sequence[str] = DEFAULT_VARS):
        vars = tuple(vars)
        if len(set(vars)) != len(vars):
            raise ValueError(f"duplicate variable names in {vars}")
        acc: dict[tuple, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(vars):
                raise ValueError(f"exponent vector {exps} does not match variables {vars}")
            acc[exps] = acc.get(exps, Fraction(0)) + as_rational(c)
        self._terms = {e: c for e, c in sorted(acc.items()) if c != 0}
        self._vars = vars
        self._hash = None

    # -- construction helpers ------------------------------------------------
    @classmethod
    def constant(cls, c, vars: Sequence[str] = DEFAULT_VARS) -> "LaurentPoly":
        return cls({(0,) * len(vars): c}, vars)

    @classmethod
    def var(cls, name: str, vars: Sequence[str] = DEFAULT_VARS) -> "LaurentPoly":
        vars = tuple(vars)
        exps = tuple(1 if v == name else 0 for v in vars)
        if name not in vars:
            raise ValueError(f"unknown variable {name!r}")
        return cls({exps: 1}, vars)

    @classmethod
    def from_univariate(cls, coeffs: Sequence, var: str = "x", vars: Sequence[str] | None = None) -> "LaurentPoly":
        vars = tuple(vars) if vars is not None else (var,)
        i = vars.index(var)
        terms = {}
        for d, c in enumerate(coeffs):
            e = [0] * len(vars)
            e[i] = d
            terms[tuple(e)] = c
        return cls(terms, vars)

    # -- basic accessors -----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def vars(self) -> tuple:
        return self._vars

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coefficient(self, exps: tuple) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def degree_range(self, var: str) -> tuple[int, int]:
        i = self._vars.index(var)
        if not self._terms:
            raise ValueError("zero polynomial has no degree")
        es = [e[i] for e in self._terms]
        return min(es), max(es)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other._vars == self._vars:
                return other
            return other.with_vars(self._vars)
        return LaurentPoly.constant(as_rational(other), self._vars)

    def with_vars(self, vars: Sequence[str]) -> "LaurentPoly":
        """Re-express over a superset of variables (missing variables get exponent 0)."""
        vars = tuple(vars)
        missing = [v for v in self._vars if v not in vars]
        for v in missing:
            if any(e[self._vars.index(v)] for e in self._terms):
                raise ValueError(f"variable {v!r} occurs but is absent from {vars}")
        idx = {v: i for i, v in enumerate(self._vars)}
        terms = {}
        for e, c in self._terms.items():
            terms[tuple(e[idx[v]] if v in idx else 0 for v in vars)] = c
        return LaurentPoly(terms, vars)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return LaurentPoly(terms, self._vars)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._terms.items()}, self._vars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict[tuple, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return LaurentPoly(terms, self._vars)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            if not self.is_monomial():
                raise ValueError("only monomials can be raised to negative powers")
            (e, c), = self._terms.items()
            return LaurentPoly({tuple(a * n for a in e): c ** n}, self._vars)
        result = LaurentPoly.constant(1, self._vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            if other._vars != self._vars:
                try:
                    other = other.with_vars(self._vars)
                except ValueError:
                    return False
            return self._terms == other._terms
        try:
            return self == LaurentPoly.constant(as_rational(other), self._vars)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._vars, tuple(self._terms.items())))
        return self._hash

    # -- substitution and evaluation -----------------------------------------
    def monomial_shift(self, exps: Sequence[int]) -> "LaurentPoly":
        """Multiply by the monomial with exponent vector ``exps``."""
        return LaurentPoly({tuple(a + b for a, b in zip(e, exps)): c for e, c in self._terms.items()}, self._vars)

    def clear_denominators(self) -> tuple["LaurentPoly", tuple]:
        """Return ``(q, m)`` with ``q = self * monomial(m)`` a genuine polynomial.

        ``m`` is chosen minimal, so ``q`` is not divisible by any variable.
        """
        if not self._terms:
            raise ValueError("zero polynomial")
        mins = tuple(min(e[i] for e in self._terms) for i in range(len(self._vars)))
        shift = tuple(-m for m in mins)
        return self.monomial_shift(shift), shift

    def invert_vars(self, names: Iterable[str] | None = None) -> "LaurentPoly":
        names = set(self._vars if names is None else names)
        flip = [v in names for v in self._vars]
        return LaurentPoly(
            {tuple(-a if f else a for a, f in zip(e, flip)): c for e, c in self._terms.items()},
            self._vars,
        )

    def substitute(self, mapping: Mapping[str, "LaurentPoly | Fraction | int"]) -> "LaurentPoly":
        """Substitute Laurent polynomials (or constants) for variables, exactly."""
        subs = {}
        for v, val in mapping.items():
            if v not in self._vars:
                raise ValueError(f"unknown variable {v!r}")
            subs[v] = self._coerce(val)
        result = LaurentPoly({}, self._vars)
        cache: dict = {}
        for e, c in self._terms.items():
            term = LaurentPoly.constant(c, self._vars)
            keep = [0] * len(self._vars)
            for i, (v, a) in enumerate(zip(self._vars, e)):
                if v in subs and a != 0:
                    key = (v, a)
                    if key not in cache:
                        cache[key] = subs[v] ** a
                    term = term * cache[key]
                else:
                    keep[i] = a
            result = result + term.monomial_shift(keep)
        return result

    def evaluate(self, *args, **kwargs):
        """Evaluate at a point; arguments are positional in ``vars`` order or keywords.

        Values may be exact (Fraction/int), floats/complex, mpmath numbers or
        numpy arrays; numpy arrays broadcast.
        """
        vals = list(args)
        if kwargs:
            vals = [kwargs[v] for v in self._vars]
        if len(vals) != len(self._vars):
            raise ValueError(f"expected {len(self._vars)} values for {self._vars}")
        total = 0
        for e, c in self._terms.items():
            t = c if all(isinstance(v, (int, Fraction)) for v in vals) else _num(c, vals)
            for v, a in zip(vals, e):
                if a:
                    t = t * (v ** a if a > 0 else 1 / v ** (-a))
            total = total + t
        return total

    def __call__(self, *args, **kwargs):
        return self.evaluate(*args, **kwargs)

    def partial(self, var: str) -> "LaurentPoly":
        i = self._vars.index(var)
        terms = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                terms[tuple(ne)] = c * e[i]
        return LaurentPoly(terms, self._vars)

    def coefficients_in(self, var: str) -> tuple[int, list["LaurentPoly"]]:
        """Split as sum_j c_j * var^(lo + j); returns ``(lo, [c_0, c_1, ...])``.

        The coefficients no longer involve ``var`` (its exponent is zeroed).
        """
        i = self._vars.index(var)
        lo, hi = self.degree_range(var)
        buckets: list[dict] = [dict() for _ in range(hi - lo + 1)]
        for e, c in self._terms.items():
            ne = list(e)
            ne[i] = 0
            buckets[e[i] - lo][tuple(ne)] = c
        return lo, [LaurentPoly(b, self._vars) for b in buckets]

    def univariate(self, var: str) -> tuple[int, list[Fraction]]:
        """Coefficient list (lowest first) when ``var`` is the only variable present."""
        i = self._vars.index(var)
        for e in self._terms:
            if any(a for j, a in enumerate(e) if j != i):
                raise ValueError(f"polynomial is not univariate in {var!r}")
        if not self._terms:
            return 0, []
        lo, hi = self.degree_range(var)
        coeffs = [Fraction(0)] * (hi - lo + 1)
        for e, c in self._terms.items():
            coeffs[e[i] - lo] = c
        return lo, coeffs

    # -- printing -------------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items(), key=lambda kv: tuple(-a for a in kv[0])):
            mono = "*".join(
                (v if a == 1 else f"{v}^{a}") for v, a in zip(self._vars, e) if a != 0
            )
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{_fmt(mag)}*{mono}"
            else:
                body = _fmt(mag)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"LaurentPoly({str(self)!r}, vars={self._vars})"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _num(c: Fraction, vals):
    if any(isinstance(v, np.ndarray) for v in vals):
        return float(c)
    try:
        import mpmath

        if any(isinstance(v, (mpmath.mpf, mpmath.mpc)) for v in vals):
            return mpmath.mpf(c.numerator) / c.denominator
    except ImportError:  # pragma: no cover
        pass
    return float(c)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, bindings, vars, aliases):
        self.toks = _tokenize(text)
        self.i = 0
        self.bindings = {k: as_rational(v) for k, v in bindings.items()}
        self.vars = tuple(vars)
        self.aliases = dict(aliases)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> LaurentPoly:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self) -> LaurentPoly:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term() * sign
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> LaurentPoly:
        acc = self.factor()
        while self.peek()[1] == "*" and self.peek()[0] == "op":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> LaurentPoly:
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            tok = self.peek()
            if tok[0] != "num":
                raise ParseError("expected integer exponent", tok[2])
            self.take()
            n = int(tok[1])
            if n > MAX_EXPONENT:
                raise ExponentOverflowError(f"exponent {n} exceeds {MAX_EXPONENT}", tok[2])
            if neg:
                if not base.is_monomial():
                    raise ParseError("negative power of a non-monomial is not a Laurent polynomial", tok[2])
                n = -n
            base = base ** n
            if not base.is_zero() and any(abs(a) > MAX_EXPONENT for e in base.terms for a in e):
                raise ExponentOverflowError("resulting exponent too large", tok[2])
        return base

    def base(self) -> LaurentPoly:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            num = Fraction(int(val))
            if self.peek()[1] == "/" and self.toks[self.i + 1][0] == "num":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    raise ParseError("zero denominator", pos)
                num = num / den
            return LaurentPoly.constant(num, self.vars)
        if kind == "name":
            self.take()
            name = self.aliases.get(val, val)
            if name in self.vars:
                return LaurentPoly.var(name, self.vars)
            if val in self.bindings:
                return LaurentPoly.constant(self.bindings[val], self.vars)
            raise UnboundParameterError(f"unbound parameter {val!r}", pos)
        if val == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_poly(
    text: str,
    bindings: Mapping[str, object] | None = None,
    vars: Sequence[str] = DEFAULT_VARS,
    aliases: Mapping[str, str] | None = None,
) -> LaurentPoly:
    """Parse ``text`` into an exact :class:`LaurentPoly`.

    Grammar (ASCII)::

        expr     := ['+'|'-'] term (('+'|'-') term)*
        term     := factor ('*' factor)*
        factor   := base ('^' ['-'] digits)?
        base     := name | rational | '(' expr ')'
        rational := digits ('/' digits)?

    Names in ``vars`` (after alias resolution) are variables, names in
    ``bindings`` are parameters. A leading sign is accepted so that printed
    polynomials parse back.
    """
    if aliases is None:
        aliases = DEFAULT_ALIASES if tuple(vars) == DEFAULT_VARS else {}
    return _Parser(text, bindings or {}, vars, aliases).parse()


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

FAMILY_TEXT = {
    "P": "(x+1)*(y+1)*(x+y) - k*x*y",
    "Q": "y^2 + (x^4 + k*x^3 + 2*k*x^2 + k*x + 1)*y + x^4",
    "R": "x + x^-1 + y + y^-1 + (k-4)",
}

FAMILIES = ("P", "Q", "R", "Qshift")


def family(name: str, k) -> LaurentPoly:
    """Boyd-type families at a rational parameter ``k``; ``Qshift`` is Q_k(x-1, y)."""
    k = as_rational(k)
    if name == "Qshift":
        return substitute_shift(family("Q", k), "x", -1)
    if name not in FAMILY_TEXT:
        raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}")
    return parse_poly(FAMILY_TEXT[name], {"k": k})


def substitute_shift(p: LaurentPoly, var: str, offset) -> LaurentPoly:
    """Exact substitution ``var -> var + offset``."""
    offset = as_rational(offset)
    i = p.vars.index(var)
    if any(e[i] < 0 for e in p.terms):
        raise ValueError(f"negative exponent in {var!r}; clear denominators first")
    terms: dict[tuple, Fraction] = {}
    for e, c in p.terms.items():
        n = e[i]
        for j in range(n + 1):
            ne = list(e)
            ne[i] = j
            key = tuple(ne)
            terms[key] = terms.get(key, 0) + c * comb(n, j) * offset ** (n - j)
    return LaurentPoly(terms, p.vars)


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonFace:
    edge: tuple[tuple[int, int], tuple[int, int]]
    face_poly: LaurentPoly

    @property
    def coefficients(self) -> list[Fraction]:
        return self.face_poly.univariate("t")[1]


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull(points) -> list[tuple[int, int]]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull


def newton_faces(p: LaurentPoly) -> list[NewtonFace]:
    """Boundary edges of the Newton polygon, counterclockwise, with face polynomials.

    The face polynomial of an edge from ``v`` to ``w`` is
    ``sum_j coeff(v + j*step) * t^j`` where ``step`` is the primitive lattice
    vector along the edge. A monomial has no faces; a segment yields its two
    orientations.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no Newton polygon")
    if len(p.vars) != 2:
        raise ValueError("Newton faces are defined here for two variables")
    hull = _hull(p.terms.keys())
    if len(hull) < 2:
        return []
    faces = []
    n = len(hull)
    for idx in range(n if n > 2 else 2):
        v, w = hull[idx % n], hull[(idx + 1) % n]
        dx, dy = w[0] - v[0], w[1] - v[1]
        g = gcd(abs(dx), abs(dy))
        step = (dx // g, dy // g)
        coeffs = [p.coefficient((v[0] + j * step[0], v[1] + j * step[1])) for j in range(g + 1)]
        faces.append(NewtonFace((v, w), LaurentPoly.from_univariate(coeffs, "t")))
    return faces


def is_tempered(p: LaurentPoly) -> bool:
    """All face polynomials have only roots of unity as roots (exact test)."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    return all(_upoly.only_roots_of_unity(f.coefficients) for f in newton_faces(p))


def is_reciprocal(p: LaurentPoly) -> bool:
    """p(1/x, 1/y) * monomial == +/- p(x, y)."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    terms = p.terms
    nv = len(p.vars)
    shift = tuple(
        max(e[i] for e in terms) + min(e[i] for e in terms) for i in range(nv)
    )
    flipped = p.invert_vars().monomial_shift(shift)
    return flipped == p or flipped == -p
