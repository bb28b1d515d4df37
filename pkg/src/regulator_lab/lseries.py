"""L-series of elliptic curves over Q: minimal models, conductors and special values.

Local data come from Tate's algorithm. Frobenius traces come from point
counts: quadratic-character sums for small p, baby-step giant-step on
random points for large p. The completed L-function
Lambda(s) = N^{s/2} (2 pi)^{-s} Gamma(s) L(s) is evaluated by the usual
incomplete-Gamma series, which also fixes the root number.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
import sympy
from scipy import special

from .ecurve.curves import WeierstrassCurve

ENUMERATION_LIMIT = 20_000
DEFAULT_NMAX = 10_000
EPS_MISMATCH = 1e-3


class TateError(RuntimeError):
    """Inconsistent state inside Tate's algorithm (a bug, not an input problem)."""


class RootNumberError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# integral models and coordinate changes
# ---------------------------------------------------------------------------

def _v(n: int, p: int) -> int:
    if n == 0:
        return 10 ** 9
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _change(a, r, s, t, u=1):
    """Standard (r, s, t, u) substitution on integer or rational a-invariants."""
    a1, a2, a3, a4, a6 = a
    u = Fraction(u)
    b = (
        (a1 + 2 * s) / u,
        (a2 - s * a1 + 3 * r - s * s) / u ** 2,
        (a3 + r * a1 + 2 * t) / u ** 3,
        (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u ** 4,
        (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) / u ** 6,
    )
    return b


def _as_int(a):
    out = []
    for c in a:
        c = Fraction(c)
        if c.denominator != 1:
            raise TateError(f"non-integral coefficient {c}")
        out.append(int(c))
    return tuple(out)


def _invariants(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return b2, b4, b6, b8, c4, c6, disc


def integral_model(curve: WeierstrassCurve) -> tuple[int, ...]:
    """Scale x, y so every a_i is an integer."""
    d = 1
    for i, c in zip((1, 2, 3, 4, 6), curve.ainvs):
        den = c.denominator
        # need d^i * c integral
        for p, e in sympy.factorint(den).items():
            need = -(-e // i)
            while _v(d, p) < need:
                d *= p
    return _as_int(_change(curve.ainvs, 0, 0, 0, Fraction(1, d)))


# ---------------------------------------------------------------------------
# Tate's algorithm
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalData:
    p: int
    kodaira: str
    conductor_exponent: int
    discriminant_valuation: int
    split: bool | None = None  # multiplicative reduction only


def _singular_point(a, p):
    """(x, y) mod p of the singular point of the reduction."""
    a1, a2, a3, a4, a6 = a
    if p == 2:
        for x in range(2):
            for y in range(2):
                f = y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)
                fx = a1 * y - (3 * x * x + 2 * a2 * x + a4)
                fy = 2 * y + a1 * x + a3
                if f % 2 == 0 and fx % 2 == 0 and fy % 2 == 0:
                    return x, y
        raise TateError("no singular point mod 2")
    b2, b4, b6, *_ = _invariants(a)
    inv2 = pow(2, -1, p)
    xs = np.arange(p, dtype=object)
    f = (4 * xs ** 3 + b2 * xs * xs + 2 * b4 * xs + b6) % p
    df = (12 * xs * xs + 2 * b2 * xs + 2 * b4) % p
    hits = [int(x) for x in xs[(f == 0) & (df == 0)]]
    if not hits:
        raise TateError(f"no singular point mod {p}")
    x = hits[0]
    y = (-(a1 * x + a3) * inv2) % p
    return x, y


def _quad_distinct(a, b, c, p) -> bool:
    """Whether a X^2 + b X + c has distinct roots mod p (a a unit)."""
    if p == 2:
        return b % 2 == 1
    return (b * b - 4 * a * c) % p != 0


def _quad_double_root(a, b, c, p) -> int:
    if p == 2:
        return c % 2 if a % 2 else 0
    return (-b * pow(2 * a, -1, p)) % p


def tate(a, p: int) -> tuple[LocalData, tuple[int, ...]]:
    """Local data at p and a p-minimal integral model (other primes untouched)."""
    a = _as_int(a)
    while True:
        *_, disc = _invariants(a)
        n = _v(disc, p)
        if n == 0:
            return LocalData(p, "I0", 0, 0), a
        x0, y0 = _singular_point(a, p)
        a = _as_int(_change(a, x0, 0, y0))
        a1, a2, a3, a4, a6 = a
        b2, b4, b6, b8, *_ = _invariants(a)
        if not (a3 % p == 0 and a4 % p == 0 and a6 % p == 0):
            raise TateError("singular point not moved to the origin")
        if b2 % p:
            return LocalData(p, f"I{n}", 1, n, _split(a, p)), a
        if a6 % (p * p):
            return LocalData(p, "II", n, n), a
        if b8 % p ** 3:
            return LocalData(p, "III", n - 1, n), a
        if b6 % p ** 3:
            return LocalData(p, "IV", n - 2, n), a
        # p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = a2 % 2
            t = 2 * ((a6 // 4) % 2)
        else:
            s = (-a1 * pow(2, -1, p)) % p
            t = (-a3 * pow(2, -1, p * p)) % (p * p)
        a = _as_int(_change(a, 0, s, t))
        a1, a2, a3, a4, a6 = a
        if a1 % p or a2 % p or a3 % p ** 2 or a4 % p ** 2 or a6 % p ** 3:
            raise TateError("step 6 normalisation failed")
        b, c, d = a2 // p, a4 // p ** 2, a6 // p ** 3
        w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
        x = 3 * c - b * b
        if w % p:
            return LocalData(p, "I0*", n - 4, n), a
        if x % p:
            # one double root: move it to 0, then peel quadratics
            if p == 2:
                r = c
            elif p == 3:
                r = b * c
            else:
                r = (b * c - 9 * d) * pow(2 * x, -1, p)
            a = _as_int(_change(a, p * (r % p), 0, 0))
            m = 1
            while True:
                a1, a2, a3, a4, a6 = a
                if m % 2:
                    e3 = (m + 3) // 2
                    qa, qb, qc = 1, a3 // p ** e3, -(a6 // p ** (m + 3))
                    if _quad_distinct(qa, qb, qc, p):
                        return LocalData(p, f"I{m}*", n - 4 - m, n), a
                    root = _quad_double_root(qa, qb, qc, p)
                    a = _as_int(_change(a, 0, 0, root * p ** e3))
                else:
                    e4 = (m + 4) // 2
                    qa, qb, qc = a2 // p, a4 // p ** e4, a6 // p ** (m + 3)
                    if _quad_distinct(qa, qb, qc, p):
                        return LocalData(p, f"I{m}*", n - 4 - m, n), a
                    root = _quad_double_root(qa, qb, qc, p)
                    # here x = p^(m/2 + 1) X
                    a = _as_int(_change(a, root * p ** (e4 - 1), 0, 0))
                m += 1
                if m > 4 * n + 8:
                    raise TateError("I_m* loop did not terminate")
        # triple root
        rho = (-b * pow(3, -1, p)) % p if p != 3 else (-d) % 3
        a = _as_int(_change(a, p * rho, 0, 0))
        a1, a2, a3, a4, a6 = a
        qb, qc = a3 // p ** 2, -(a6 // p ** 4)
        if _quad_distinct(1, qb, qc, p):
            return LocalData(p, "IV*", n - 6, n), a
        root = _quad_double_root(1, qb, qc, p)
        a = _as_int(_change(a, 0, 0, root * p ** 2))
        a1, a2, a3, a4, a6 = a
        if a4 % p ** 4:
            return LocalData(p, "III*", n - 7, n), a
        if a6 % p ** 6:
            return LocalData(p, "II*", n - 8, n), a
        # not minimal at p
        a = _as_int(_change(a, 0, 0, 0, p))


def _count_affine(a, p: int) -> int:
    """Affine points (singular one included) on the reduction mod p."""
    a1, a2, a3, a4, a6 = (c % p for c in a)
    if p == 2:
        return sum(
            (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % 2 == 0
            for x in range(2) for y in range(2)
        )
    xs = np.arange(p, dtype=np.int64)
    d = ((a1 * xs + a3) % p) ** 2 % p
    cub = (((xs * xs % p) * xs) % p + a2 * (xs * xs % p) + a4 * xs + a6) % p
    d = (d + 4 * cub) % p
    chi = np.full(p, -1, dtype=np.int64)
    chi[(xs * xs) % p] = 1
    chi[0] = 0
    return int(p + chi[d].sum())


def _split(a, p: int) -> bool:
    # nodal reduction: #(all points) = p + 1 - a_p with a_p = +1 split, -1 not
    return _count_affine(a, p) + 1 == p


def minimal_model(curve: WeierstrassCurve) -> WeierstrassCurve:
    """Global minimal model in reduced form (a1, a3 in {0, 1}, a2 in {-1, 0, 1})."""
    return _minimal(curve)[0]


def _minimal(curve: WeierstrassCurve):
    a = integral_model(curve)
    local = []
    *_, disc = _invariants(a)
    for p in sorted(sympy.factorint(abs(disc))):
        data, a = tate(a, p)
        if data.conductor_exponent > 0:
            local.append(data)
    # re-run local data on the final model so all entries refer to it
    a = _reduce_model(a)
    *_, disc = _invariants(a)
    local = [tate(a, p)[0] for p in sorted(sympy.factorint(abs(disc)))]
    E = WeierstrassCurve(*a, label=curve.label)
    return E, [d for d in local if d.conductor_exponent > 0]


def _reduce_model(a):
    a1 = a[0]
    s = -(a1 // 2)
    a = _as_int(_change(a, 0, s, 0))
    r = -((a[1] + 1) // 3)
    a = _as_int(_change(a, r, 0, 0))
    t = -(a[2] // 2)
    return _as_int(_change(a, 0, 0, t))


def local_data(curve: WeierstrassCurve) -> list[LocalData]:
    return _minimal(curve)[1]


def conductor(curve: WeierstrassCurve) -> int:
    return reduce(lambda acc, d: acc * d.p ** d.conductor_exponent, local_data(curve), 1)


# ---------------------------------------------------------------------------
# Frobenius traces
# ---------------------------------------------------------------------------

def _ec_add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _ec_mul(n, P, A, p):
    R = None
    while n:
        if n & 1:
            R = _ec_add(R, P, A, p)
        P = _ec_add(P, P, A, p)
        n >>= 1
    return R


def _random_point(A, B, p, rng):
    while True:
        x = rng.randrange(p)
        f = (x * x * x + A * x + B) % p
        if f == 0:
            continue
        if pow(f, (p - 1) // 2, p) == 1:
            return x, sympy.sqrt_mod(f, p)


def _order_candidates(P, lo, hi, A, p):
    """All m in [lo, hi] with m P = O, by baby-step giant-step."""
    width = hi - lo
    s = math.isqrt(width) + 1
    baby = {}
    R = None
    for i in range(s):
        if R is None:
            baby.setdefault(None, []).append((i, None))
        else:
            baby.setdefault(R[0], []).append((i, R[1]))
        R = _ec_add(R, P, A, p)
    step = _ec_mul(s, P, A, p)
    G = _ec_mul(lo, P, A, p)
    out = []
    for g in range(s + 1):
        key = None if G is None else G[0]
        for i, y in baby.get(key, []):
            # G + iP = O  <=>  iP = -G
            if G is None and y is None or (G is not None and y is not None and (y + G[1]) % p == 0):
                j = g * s + i
                if j <= width:
                    out.append(lo + j)
        G = _ec_add(G, step, A, p)
    return sorted(set(out))


def _ap_bsgs(c4: int, c6: int, p: int, seed: int = 0) -> int | None:
    A, B = (-27 * c4) % p, (-54 * c6) % p
    rng = random.Random(p * 7919 + seed)
    root = math.isqrt(4 * p)
    lo, hi = p + 1 - root, p + 1 + root
    M = 1
    for _ in range(12):
        P = _random_point(A, B, p, rng)
        cands = _order_candidates(P, lo, hi, A, p)
        if len(cands) == 1:
            return p + 1 - cands[0]
        if len(cands) >= 2:
            M = math.lcm(M, cands[1] - cands[0])
        mult = [m for m in range(lo, hi + 1) if m % M == 0]
        if len(mult) == 1:
            return p + 1 - mult[0]
    return None


def ap(curve_min: WeierstrassCurve, p: int, local: dict[int, LocalData] | None = None) -> int:
    """Trace of Frobenius at p on a minimal model (bad primes included)."""
    a = _as_int(curve_min.ainvs)
    if local is not None and p in local:
        d = local[p]
        if d.conductor_exponent >= 2:
            return 0
        return 1 if d.split else -1
    if p > ENUMERATION_LIMIT:
        *_, c4, c6, disc = _invariants(a)
        if disc % p:
            val = _ap_bsgs(c4, c6, p)
            if val is not None:
                return val
    return p - _count_affine(a, p)


def _ap_chunk(args):
    ainvs, primes, local = args
    E = WeierstrassCurve(*ainvs)
    return [ap(E, p, local) for p in primes]


def ap_table(curve_min: WeierstrassCurve, bound: int, local: dict[int, LocalData],
             jobs: int = 1) -> dict[int, int]:
    """a_p for all primes p <= bound, optionally spread over worker processes."""
    primes = [int(p) for p in sympy.primerange(2, bound + 1)]
    if jobs <= 1 or len(primes) < 1000:
        return {p: ap(curve_min, p, local) for p in primes}
    from concurrent.futures import ProcessPoolExecutor

    # interleave so every chunk gets a mix of small and large primes
    chunks = [primes[i::jobs * 4] for i in range(jobs * 4)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(_ap_chunk, [(curve_min.ainvs, c, local) for c in chunks])
        out = {}
        for chunk, vals in zip(chunks, results):
            out.update(zip(chunk, vals))
    return out


def an_list(curve_min: WeierstrassCurve, nmax: int, local: list[LocalData] | None = None,
            jobs: int = 1) -> np.ndarray:
    """a_1 .. a_nmax (index 0 unused) from a_p via multiplicativity and the Hecke recursion."""
    local = {d.p: d for d in (local if local is not None else local_data(curve_min))}
    an = np.zeros(nmax + 1, dtype=np.int64)
    an[1] = 1
    for p, a_p in ap_table(curve_min, nmax, local, jobs).items():
        bad = p in local
        pk, prev, cur = p, 1, a_p
        while pk <= nmax:
            an[pk] = cur
            nxt = a_p * cur - (0 if bad else p * prev)
            prev, cur = cur, nxt
            pk *= p
    # multiplicative closure via smallest prime power factor
    spf = np.zeros(nmax + 1, dtype=np.int64)
    for p in sympy.primerange(2, nmax + 1):
        p = int(p)
        block = spf[p::p]
        block[block == 0] = p
    for n in range(2, nmax + 1):
        p = spf[n]
        m = n
        q = 1
        while m % p == 0:
            m //= p
            q *= p
        if m != 1:
            an[n] = an[q] * an[m]
    return an


# ---------------------------------------------------------------------------
# special values
# ---------------------------------------------------------------------------

@dataclass
class LSeriesData:
    curve: WeierstrassCurve
    conductor: int
    root_number: int
    coefficients: np.ndarray = field(repr=False)
    local: list[LocalData] = field(default_factory=list)

    @property
    def nmax(self) -> int:
        return len(self.coefficients) - 1


def _terms_needed(N: int, t: float, tol: float = 1e-20) -> int:
    c = 2 * math.pi / math.sqrt(N) * min(t, 1 / t)
    n = 1
    while n * math.exp(-c * n) / max(c * n, 1e-300) > tol:
        n += 1
    return n + 10


def _upper_gamma(s: float, x: np.ndarray) -> np.ndarray:
    if s > 0:
        return special.gammaincc(s, x) * special.gamma(s)
    if s == 0:
        return special.exp1(x)
    # Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s
    return (_upper_gamma(s + 1, x) - x ** s * np.exp(-x)) / s


def completed_l(an: np.ndarray, N: int, eps: int, s: float, t: float = 1.0) -> tuple[float, float]:
    """Lambda(s) via the incomplete-Gamma series split at t; returns (value, tail bound)."""
    M = min(len(an) - 1, _terms_needed(N, t))
    n = np.arange(1, M + 1, dtype=float)
    a = an[1:M + 1].astype(float)
    c = 2 * math.pi * n / math.sqrt(N)
    val = np.sum(a * (c ** -s * _upper_gamma(s, c * t) + eps * c ** (s - 2) * _upper_gamma(2 - s, c / t)))
    cmin = 2 * math.pi / math.sqrt(N) * min(t, 1 / t)
    tail = (M + 1) ** 2 * math.exp(-cmin * (M + 1)) / (1 - math.exp(-cmin))
    return float(val), tail


def detect_root_number(an: np.ndarray, N: int) -> int:
    """The sign for which Lambda(1) does not depend on the split point."""
    gaps = {}
    for eps in (1, -1):
        v1, _ = completed_l(an, N, eps, 1.0, 1.1)
        v2, _ = completed_l(an, N, eps, 1.0, 1.4)
        gaps[eps] = abs(v1 - v2)
    good = [e for e, g in gaps.items() if g < 1e-10]
    bad = [e for e, g in gaps.items() if g > EPS_MISMATCH]
    if len(good) != 1 or len(bad) != 1:
        raise RootNumberError(f"functional equation inconsistent: {gaps}")
    return good[0]


def lseries_data(curve: WeierstrassCurve, nmax: int | None = None) -> LSeriesData:
    E, local = _minimal(curve)
    N = reduce(lambda acc, d: acc * d.p ** d.conductor_exponent, local, 1)
    nmax = nmax if nmax is not None else min(DEFAULT_NMAX, _terms_needed(N, 1.4))
    an = an_list(E, nmax, local)
    eps = detect_root_number(an, N)
    return LSeriesData(E, N, eps, an, local)


def l_at_2(data: LSeriesData) -> tuple[float, float]:
    """L(E, 2) with a tail bound, from Lambda(2) = N (2 pi)^-2 L(2)."""
    lam, tail = completed_l(data.coefficients, data.conductor, data.root_number, 2.0)
    scale = (2 * math.pi) ** 2 / data.conductor
    return lam * scale, tail * scale


def l_prime_at_0(data: LSeriesData) -> float:
    """L'(E, 0) = eps N L(E, 2) / (4 pi^2)."""
    l2, _ = l_at_2(data)
    return data.root_number * data.conductor * l2 / (4 * math.pi ** 2)


def partial_sum_l2(an: np.ndarray) -> float:
    n = np.arange(1, len(an), dtype=float)
    return float(np.sum(an[1:] / (n * n)))
