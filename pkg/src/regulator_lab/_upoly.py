"""Exact univariate polynomial helpers.

Polynomials are lists of ``Fraction`` coefficients, lowest degree first,
with no trailing zeros (the zero polynomial is ``[]``).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

UPoly = list


def trim(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def deg(p: Sequence) -> int:
    return len(p) - 1


def add(p: Sequence, q: Sequence) -> UPoly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def neg(p: Sequence) -> UPoly:
    return [-c for c in p]


def sub(p: Sequence, q: Sequence) -> UPoly:
    return add(p, neg(q))


def mul(p: Sequence, q: Sequence) -> UPoly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def scale(p: Sequence, c) -> UPoly:
    return trim([a * c for a in p])


def divmod_(p: Sequence, q: Sequence) -> tuple[UPoly, UPoly]:
    q = trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = trim(p)
    if len(r) < len(q):
        return [], r
    quo = [Fraction(0)] * (len(r) - len(q) + 1)
    lead = q[-1]
    while len(r) >= len(q) and r:
        shift = len(r) - len(q)
        c = r[-1] / lead
        quo[shift] = c
        for i, b in enumerate(q):
            r[i + shift] -= c * b
        r = trim(r)
    return trim(quo), r


def monic(p: Sequence) -> UPoly:
    p = trim(p)
    return [c / p[-1] for c in p] if p else []


def pgcd(p: Sequence, q: Sequence) -> UPoly:
    a, b = trim(p), trim(q)
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def derivative(p: Sequence) -> UPoly:
    return trim([i * p[i] for i in range(1, len(p))])


def squarefree_part(p: Sequence) -> UPoly:
    p = trim(p)
    if len(p) <= 1:
        return monic(p)
    g = pgcd(p, derivative(p))
    return monic(divmod_(p, g)[0])


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def content_free(p: Sequence) -> UPoly:
    """Primitive integer polynomial with positive leading coefficient."""
    p = trim(p)
    if not p:
        return []
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return [Fraction(c) for c in ints]


def _totient(n: int) -> int:
    out, m, d = n, n, 2
    while d * d <= m:
        if m % d == 0:
            while m % d == 0:
                m //= d
            out -= out // d
        d += 1
    if m > 1:
        out -= out // m
    return out


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> tuple:
    """Coefficients of the n-th cyclotomic polynomial (as a tuple)."""
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            num, r = divmod_(num, list(cyclotomic(d)))
            assert not r
    return tuple(num)


def cyclotomic_indices_up_to_degree(dmax: int) -> list[int]:
    # phi(n) >= sqrt(n/2), so phi(n) <= dmax forces n <= 2*dmax**2
    return [n for n in range(1, 2 * dmax * dmax + 3) if _totient(n) <= dmax]


def only_roots_of_unity(p: Sequence) -> bool:
    """True iff every root of ``p`` (after removing the factor x^v) is a root of unity.

    Exact: the squarefree part is divided by every cyclotomic polynomial whose
    degree does not exceed its own; the roots are all roots of unity exactly
    when nothing but a constant remains.
    """
    p = trim(p)
    if not p:
        raise ValueError("zero polynomial")
    while p and p[0] == 0:
        p = p[1:]
    f = squarefree_part(p)
    if len(f) <= 1:
        return True
    for n in cyclotomic_indices_up_to_degree(deg(f)):
        phi = list(cyclotomic(n))
        if len(phi) > len(f):
            continue
        q, r = divmod_(f, phi)
        if not r:
            f = q
            if len(f) <= 1:
                return True
    return len(f) <= 1
