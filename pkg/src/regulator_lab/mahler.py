"""Numerical Mahler measures, Deninger paths, eta integrals and loop integrals.

Two-variable measures use Jensen's formula in ``y``: for ``x`` on the unit
circle the inner integral is ``log|a_0(x)| + sum log+|y_k(x)|``, which is
integrated over ``x = exp(2 pi i t)`` with panel-adaptive Gauss-Legendre.
Panels are split where some root crosses or touches ``|y| = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
import sympy
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .polyfam import LaurentPoly, as_rational, family, parse_poly, substitute_shift
from .quadrature import QuadratureError, QuadResult, gauss_legendre_adaptive, tanh_sinh

TWO_PI = 2.0 * math.pi
SCAN_NODES = 2048


class RootSolveError(RuntimeError):
    pass


class DegenerateLeadingError(ValueError):
    """Leading y-coefficient vanishes at the requested x and nothing is left."""


class TorusComponentError(ValueError):
    """The curve contains a whole component of the unit torus (resultant is zero)."""


class BranchCollisionError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class PathSingularityError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# polynomial in y with coefficients evaluated on x arrays
# ---------------------------------------------------------------------------

class _YPoly:
    """A two-variable polynomial viewed as sum_j a_j(x) y^j, numerically."""

    def __init__(self, p: LaurentPoly, yvar: str = "y"):
        if p.is_zero():
            raise ValueError("zero polynomial")
        xvar = [v for v in p.vars if v != yvar]
        if len(xvar) != 1:
            raise ValueError("expected a two-variable polynomial")
        self.xvar = xvar[0]
        self.poly, _ = p.clear_denominators()
        _, coeffs = self.poly.coefficients_in(yvar)
        self.exact = []
        for c in coeffs:
            c = c.with_vars((self.xvar, yvar))
            lo, cs = (0, []) if c.is_zero() else c.univariate(self.xvar)
            full = [Fraction(0)] * lo + list(cs)
            self.exact.append(full)
        self.num = [np.array([float(c) for c in reversed(cs)]) if cs else np.zeros(1) for cs in self.exact]
        self.degree = len(self.exact) - 1
        if self.degree < 1:
            raise ValueError(f"polynomial has no {yvar}-dependence")

    def coeff_matrix(self, x: np.ndarray) -> np.ndarray:
        """Shape (n, d+1), column j = a_j(x)."""
        x = np.asarray(x, dtype=complex)
        return np.stack([np.polyval(c, x) for c in self.num], axis=-1)

    def leading_exact(self) -> list[Fraction]:
        return self.exact[-1]


def _stable_quadratic(a, b, c):
    """Roots q/a and c/q of a y^2 + b y + c with q = -(b + s sqrt(d))/2."""
    d = np.sqrt(b * b - 4 * a * c + 0j)
    s = np.where((np.conj(b) * d).real >= 0, 1.0, -1.0)
    q = -(b + s * d) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / a
        r2 = np.where(q != 0, c / q, 0)
    return r1, r2, q, s * d


def _aberth(coeffs: np.ndarray, max_iter: int = 200) -> np.ndarray:
    """Simultaneous Aberth-Ehrlich iteration, vectorized over rows.

    ``coeffs`` has shape (n, d+1), lowest degree first, leading entries nonzero.
    """
    n, dp1 = coeffs.shape
    d = dp1 - 1
    monic = coeffs / coeffs[:, -1:]
    # Fujiwara-type radius for initial guesses
    ratios = np.abs(monic[:, :-1]) ** (1.0 / (d - np.arange(d)))[None, :]
    radius = 2.0 * ratios.max(axis=1)
    radius = np.where(radius > 0, radius, 1.0)
    angles = TWO_PI * np.arange(d) / d + 0.4
    z = radius[:, None] * np.exp(1j * angles)[None, :] * (0.5 + 0.5 * np.arange(1, d + 1) / d)[None, :]
    hi = monic[:, ::-1]
    dcoef = hi[:, :-1] * np.arange(d, 0, -1)[None, :]
    for _ in range(max_iter):
        p = np.zeros_like(z)
        for j in range(dp1):
            p = p * z + hi[:, j:j + 1]
        dp = np.zeros_like(z)
        for j in range(d):
            dp = dp * z + dcoef[:, j:j + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, :, None] - z[:, None, :]
            idx = np.arange(d)
            diff[:, idx, idx] = np.inf
            s = (1.0 / diff).sum(axis=2)
            corr = ratio / (1 - ratio * s)
        corr = np.where(np.isfinite(corr), corr, 0)
        z = z - corr
        if np.all(np.abs(corr) <= 1e-15 * np.maximum(np.abs(z), 1e-300)):
            break
    return z


def _residual_ok(coeffs: np.ndarray, roots: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    hi = coeffs[:, ::-1]
    p = np.zeros_like(roots)
    scale = np.zeros(roots.shape)
    for j in range(coeffs.shape[1]):
        p = p * roots + hi[:, j:j + 1]
        scale = scale * np.abs(roots) + np.abs(hi[:, j:j + 1])
    return np.abs(p) <= tol * np.maximum(scale, 1e-300)


def _roots_rows(coeffs: np.ndarray) -> np.ndarray:
    """Roots for every row of an (n, d+1) coefficient matrix with nonzero leading entries."""
    d = coeffs.shape[1] - 1
    if d == 1:
        return (-coeffs[:, 0] / coeffs[:, 1])[:, None]
    if d == 2:
        r1, r2, _, _ = _stable_quadratic(coeffs[:, 2], coeffs[:, 1], coeffs[:, 0])
        return np.stack([r1, r2], axis=1)
    roots = _aberth(coeffs)
    bad = ~_residual_ok(coeffs, roots).all(axis=1)
    if np.any(bad):
        # restart stragglers from the companion eigenvalues
        for i in np.nonzero(bad)[0]:
            roots[i] = np.roots(coeffs[i, ::-1])
        if not _residual_ok(coeffs, roots).all():
            raise RootSolveError("root solver did not converge to the residual bound")
    return roots


def roots_in_y(p: LaurentPoly, x0: complex, yvar: str = "y") -> list[complex]:
    """All y-roots of ``p(x0, y)`` with multiplicity.

    If the leading coefficient vanishes at ``x0`` the degree drops (a root
    went to infinity); the reduced root list is returned and the drop is
    reported through a ``UserWarning``.
    """
    yp = _YPoly(p, yvar)
    c = yp.coeff_matrix(np.array([x0]))[0]
    scale = np.abs(c).max()
    d = yp.degree
    while d >= 1 and abs(c[d]) <= 1e-14 * scale:
        d -= 1
    if d < 1:
        raise DegenerateLeadingError(f"all y-coefficients except the constant vanish at x={x0}")
    if d < yp.degree:
        import warnings

        warnings.warn(f"leading coefficient vanishes at x={x0}; degree drops to {d}", UserWarning, stacklevel=2)
    return list(_roots_rows(c[None, : d + 1])[0])


# ---------------------------------------------------------------------------
# one-variable measure
# ---------------------------------------------------------------------------

def mahler_1d(p: LaurentPoly) -> float:
    """Jensen: log|leading coefficient| + sum of log+|root|."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    present = [v for v in p.vars if any(e[p.vars.index(v)] for e in p.terms)]
    if len(present) > 1:
        raise ValueError("mahler_1d needs a one-variable polynomial")
    var = present[0] if present else p.vars[0]
    _, cs = p.univariate(var)
    while cs and cs[0] == 0:
        cs = cs[1:]
    lead = float(abs(cs[-1]))
    if len(cs) == 1:
        return math.log(lead)
    coeffs = np.array([[float(c) for c in cs]], dtype=complex)
    roots = _roots_rows(coeffs)[0]
    if not _residual_ok(coeffs, roots[None, :]).all():
        raise RootSolveError("one-variable roots failed the residual check")
    return math.log(lead) + float(sum(max(0.0, math.log(abs(r))) for r in roots))


# ---------------------------------------------------------------------------
# two-variable measure
# ---------------------------------------------------------------------------

@dataclass
class MahlerResult:
    value: float
    error: float
    breakpoints: list[float]
    n_evals: int

    def __float__(self) -> float:
        return self.value


def _jensen_values(yp: _YPoly, x: np.ndarray) -> np.ndarray:
    """log|a_d(x)| + sum_k log+|y_k(x)|, stable when a_d(x) is small."""
    c = yp.coeff_matrix(x)
    d = yp.degree
    with np.errstate(divide="ignore"):
        if d == 1:
            return np.maximum(np.log(np.abs(c[:, 1])), np.log(np.abs(c[:, 0])))
        if d == 2:
            a, b, cc = c[:, 2], c[:, 1], c[:, 0]
            _, _, q, _ = _stable_quadratic(a, b, cc)
            la, lq, lc = np.log(np.abs(a)), np.log(np.abs(q)), np.log(np.abs(cc))
            return np.maximum(la, lq) + np.maximum(0.0, lc - lq)
        roots = _roots_rows(c)
        return np.log(np.abs(c[:, -1])) + np.maximum(0.0, np.log(np.abs(roots))).sum(axis=1)


def _sorted_moduli(yp: _YPoly, t: np.ndarray) -> np.ndarray:
    x = np.exp(2j * np.pi * t)
    c = yp.coeff_matrix(x)
    return np.sort(np.abs(_roots_rows(c)), axis=1)


def unit_crossings(yp: _YPoly, n_scan: int = SCAN_NODES, touch_tol: float = 1e-7) -> list[float]:
    """Parameters t in [0,1) where some |y_k(e^{2 pi i t})| crosses or touches 1.

    Crossings come from sign changes of the sorted root moduli minus one on a
    uniform scan, refined by bisection to 1e-13; tangential touches come from
    small local minima of min_k ||y_k| - 1|, refined by bounded minimization.
    """
    t = np.arange(n_scan) / n_scan
    mods = _sorted_moduli(yp, t) - 1.0
    out: list[float] = []
    d = mods.shape[1]
    for j in range(d):
        g = mods[:, j]
        nxt = np.roll(g, -1)
        for i in np.nonzero(np.sign(g) * np.sign(nxt) < 0)[0]:
            a, b = t[i], t[i] + 1.0 / n_scan

            def h(s, j=j):
                return _sorted_moduli(yp, np.array([s % 1.0]))[0, j] - 1.0

            out.append(brentq(h, a, b, xtol=1e-13, rtol=1e-15) % 1.0)
    gap = np.abs(mods).min(axis=1)
    prev, nxt = np.roll(gap, 1), np.roll(gap, -1)
    step = np.abs(np.diff(np.concatenate([gap, gap[:1]]))).max()
    for i in np.nonzero((gap <= prev) & (gap <= nxt) & (gap < max(10 * step, 1e-6)))[0]:
        lo, hi = t[i] - 1.0 / n_scan, t[i] + 1.0 / n_scan
        res = minimize_scalar(
            lambda s: np.abs(_sorted_moduli(yp, np.array([s % 1.0]))[0] - 1.0).min(),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-13},
        )
        if res.fun < touch_tol:
            out.append(float(res.x) % 1.0)
    out = sorted(out)
    merged: list[float] = []
    for s in out:
        if not merged or min(abs(s - merged[-1]), 1 - abs(s - merged[-1])) > 1e-10:
            merged.append(s)
    return merged


def _panels_from(breaks: Sequence[float]) -> list[float]:
    """Integration nodes for a periodic integrand on [0,1] with breakpoints."""
    bs = sorted(set([0.0, 1.0] + [b for b in breaks if 0.0 < b < 1.0]))
    return bs


def mahler_2d(p: LaurentPoly, tol: float = 1e-10, var: str = "y", max_evals: int = 4_000_000) -> MahlerResult:
    """m(p) by Jensen reduction in ``var`` and adaptive quadrature over |x| = 1."""
    yp = _YPoly(p, var)
    breaks = unit_crossings(yp)
    # periodic integrand: rotate the origin to a breakpoint so every kink is a panel end
    shift = breaks[0] if breaks else 0.0
    rel = [(b - shift) % 1.0 for b in breaks]

    def f(t):
        return _jensen_values(yp, np.exp(2j * np.pi * (t + shift)))

    res = gauss_legendre_adaptive(f, _panels_from(rel), tol=tol, max_evals=max_evals)
    if res.error > tol:
        raise QuadratureError(f"error estimate {res.error:.3g} exceeds tol {tol:.3g}", res)
    return MahlerResult(float(res.value), float(res.error), breaks, res.n_evals)


def mahler_riemann(p: LaurentPoly, n: int = 1_000_000, var: str = "y", chunk: int = 100_000) -> float:
    """Uniform midpoint-rule oracle for m(p).

    Shares nothing with the adaptive path beyond Jensen's formula: roots come
    from batched companion-matrix eigenvalues and no breakpoints are used.
    """
    yp = _YPoly(p, var)
    d = yp.degree
    total = 0.0
    for start in range(0, n, chunk):
        idx = np.arange(start, min(n, start + chunk))
        c = yp.coeff_matrix(np.exp(2j * np.pi * (idx + 0.5) / n))
        comp = np.zeros((len(idx), d, d), dtype=complex)
        comp[:, 0, :] = -c[:, -2::-1] / c[:, -1:]
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
        vals = np.log(np.abs(c[:, -1])) + np.maximum(0.0, np.log(np.abs(roots))).sum(axis=1)
        total += math.fsum(vals)
    return total / n


# ---------------------------------------------------------------------------
# torus intersections and Deninger paths
# ---------------------------------------------------------------------------

_X, _Y = sympy.symbols("x y")


def to_sympy(p: LaurentPoly, xvar: str = "x", yvar: str = "y") -> sympy.Expr:
    q, _ = p.clear_denominators()
    q = q.with_vars((xvar, yvar))
    return sum(sympy.Rational(c.numerator, c.denominator) * _X ** e[0] * _Y ** e[1] for e, c in q.terms.items())


def _numeric_roots(poly: sympy.Poly, dps: int = 40) -> list:
    coeffs = [sympy.Rational(c) for c in poly.all_coeffs()]
    if len(coeffs) == 2:
        return [mpmath.mpf(-coeffs[1].p) / coeffs[1].q / (mpmath.mpf(coeffs[0].p) / coeffs[0].q)]
    with mpmath.workdps(dps):
        return mpmath.polyroots([mpmath.mpf(c.p) / c.q for c in coeffs], maxsteps=400, extraprec=4 * dps)


def _y_roots_at(M: sympy.Expr, xr, dps: int = 40) -> list[complex]:
    coeffs = sympy.Poly(M, _Y).all_coeffs()
    with mpmath.workdps(dps):
        cs = [mpmath.mpmathify(sympy.lambdify(_X, c, "mpmath")(xr)) if c.free_symbols else mpmath.mpf(sympy.Rational(c).p) / sympy.Rational(c).q for c in coeffs]
        while cs and abs(cs[0]) == 0:
            cs = cs[1:]
        if len(cs) < 2:
            return []
        return [complex(z) for z in mpmath.polyroots(cs, maxsteps=400, extraprec=4 * dps)]


def _self_reciprocal_points(G: sympy.Expr, n_scan: int = 4096) -> list[tuple[complex, complex]]:
    """Torus points of a factor shared with its reciprocal partner.

    On the torus such a factor is real up to a monomial, so its zero set
    there is empty, finite, or a real curve. It is scanned over |x| = 1:
    a run of nodes with some |y| = 1 means a torus component.
    """
    gp = sympy.Poly(G, _X, _Y)
    if gp.degree(_Y) < 1:
        if any(abs(abs(complex(z)) - 1) < 1e-9 for z in _numeric_roots(sympy.Poly(G, _X))):
            raise TorusComponentError("a factor in x alone vanishes on the unit circle: torus component")
        return []
    terms = {(int(i), int(j)): Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for (i, j), c in gp.terms()}
    yp = _YPoly(LaurentPoly(terms, ("x", "y")))
    t = np.arange(n_scan) / n_scan
    gap = np.abs(_sorted_moduli(yp, t) - 1.0).min(axis=1)
    hits = gap < 1e-6
    if np.any(hits & np.roll(hits, 1) & np.roll(hits, -1)):
        raise TorusComponentError("the curve contains a real curve on the unit torus")
    out = []
    prev, nxt = np.roll(gap, 1), np.roll(gap, -1)
    for i in np.nonzero((gap <= prev) & (gap <= nxt) & (gap < 1e-2))[0]:
        res = minimize_scalar(
            lambda s: np.abs(_sorted_moduli(yp, np.array([s % 1.0]))[0] - 1.0).min(),
            bounds=(t[i] - 1.0 / n_scan, t[i] + 1.0 / n_scan), method="bounded", options={"xatol": 1e-14},
        )
        if res.fun < 1e-7:
            x0 = complex(np.exp(2j * np.pi * res.x))
            for yr in _roots_rows(yp.coeff_matrix(np.array([x0])))[0]:
                if abs(abs(yr) - 1) < 1e-6:
                    out.append((x0, complex(yr)))
    return out


def torus_intersections(p: LaurentPoly, tol: float = 1e-9) -> list[tuple[complex, complex]]:
    """All points of p = 0 on |x| = |y| = 1.

    The resultant in y of p and its reciprocal partner x^a y^b p(1/x, 1/y)
    (the coefficients are rational, so conjugation is inversion on the torus)
    is factored exactly; unit-circle roots of each factor are back-substituted.
    A factor shared by p and its partner makes the resultant vanish; that
    factor is split off and scanned numerically instead.
    """
    q, _ = p.clear_denominators()
    ax, ay = q.degree_range("x")[1], q.degree_range("y")[1]
    star = q.invert_vars().monomial_shift((ax, ay))
    M, Ms = to_sympy(q), to_sympy(star)
    out: list[tuple[complex, complex]] = []
    G = sympy.gcd(M, Ms)
    if sympy.Poly(G, _X, _Y).total_degree() > 0:
        out += _self_reciprocal_points(G)
        M = sympy.cancel(M / G)
        Ms = sympy.cancel(Ms / sympy.gcd(Ms, G))
    if sympy.Poly(M, _X, _Y).degree(_Y) >= 1:
        res = sympy.expand(sympy.resultant(M, Ms, _Y))
        if res == 0:
            raise TorusComponentError("resultant vanishes identically: the curve contains a torus component")
        _, factors = sympy.factor_list(res, _X) if res.free_symbols else (res, [])
        for fac, _mult in factors:
            fp = sympy.Poly(fac, _X)
            if fp.degree() < 1:
                continue
            for xr in _numeric_roots(fp):
                if abs(abs(xr) - 1) > tol:
                    continue
                for yr in _y_roots_at(M, xr):
                    if abs(abs(yr) - 1) <= 1e-7:
                        out.append((complex(xr), yr))
    elif sympy.Poly(M, _X, _Y).total_degree() > 0:
        out += _self_reciprocal_points(M)
    uniq: list[tuple[complex, complex]] = []
    for pt in out:
        if not any(abs(pt[0] - o[0]) < 1e-6 and abs(pt[1] - o[1]) < 1e-6 for o in uniq):
            uniq.append(pt)
    uniq.sort(key=lambda z: (round(z[0].real, 9), round(z[0].imag, 9), round(z[1].real, 9), round(z[1].imag, 9)))
    return uniq


@dataclass(frozen=True)
class CirclePath:
    center: Fraction = Fraction(0)
    radius: Fraction = Fraction(1)
    samples: tuple = ()
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if any(b <= a for a, b in zip(self.samples, self.samples[1:])):
            raise ValueError("samples must be strictly increasing")
        if any(not (0 <= b < 1) for b in self.breakpoints):
            raise ValueError("breakpoints must lie in [0,1)")

    def point(self, t):
        return float(self.center) + float(self.radius) * np.exp(2j * np.pi * np.asarray(t))


@dataclass
class DeningerPath:
    base: CirclePath
    t: np.ndarray
    roots: np.ndarray
    branch: np.ndarray
    closed: bool
    torus_intersections: list
    collisions: list = field(default_factory=list)
    poly: LaurentPoly | None = None

    def branch_roots(self, i: int) -> np.ndarray:
        return self.roots[i][self.branch[i]]


def _recenter(p: LaurentPoly, contour: CirclePath) -> LaurentPoly:
    """p(center + radius * x, y): the contour becomes the unit circle."""
    if contour.center == 0 and contour.radius == 1:
        return p
    q, _ = p.clear_denominators()
    shifted = substitute_shift(q, "x", Fraction(contour.center))
    return shifted.substitute({"x": LaurentPoly.var("x", q.vars) * Fraction(contour.radius)})


def _track(yp: _YPoly, t: np.ndarray, max_refine: int = 12) -> tuple[np.ndarray, np.ndarray, list]:
    """Roots along t with branch labels matched by minimal-distance assignment.

    A step is refined (midpoint inserted) while the smallest gap between
    distinct roots is below four times the root movement across the step.
    """
    ts = list(t)
    roots = list(_roots_rows(yp.coeff_matrix(np.exp(2j * np.pi * np.array(ts)))))
    collisions = []
    i = 0
    refinements = 0
    while i < len(ts) - 1:
        a, b = roots[i], roots[i + 1]
        cost = np.abs(a[:, None] - b[None, :])
        _, col = linear_sum_assignment(cost)
        b = b[col]
        move = np.abs(a - b).max()
        if len(a) > 1:
            gaps = np.abs(a[:, None] - a[None, :])[~np.eye(len(a), dtype=bool)]
            gap = gaps.min()
        else:
            gap = np.inf
        if gap < 4 * move and ts[i + 1] - ts[i] > 1e-9 and refinements < max_refine * len(t):
            mid = 0.5 * (ts[i] + ts[i + 1])
            ts.insert(i + 1, mid)
            roots.insert(i + 1, _roots_rows(yp.coeff_matrix(np.exp(2j * np.pi * np.array([mid]))))[0])
            refinements += 1
            continue
        if gap < 1e-7:
            collisions.append(ts[i])
        roots[i + 1] = b
        i += 1
    return np.array(ts), np.array(roots), collisions


def _leading_zeros_on_circle(yp: _YPoly) -> list[float]:
    """Parameters t where the leading y-coefficient vanishes on |x| = 1 (a root escapes to infinity)."""
    lead = list(yp.leading_exact())
    while lead and lead[0] == 0:
        lead = lead[1:]
    if len(lead) < 2:
        return []
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(lead)], _X)
    out = []
    for z in _numeric_roots(poly):
        z = complex(z)
        if abs(abs(z) - 1) < 1e-12:
            out.append((math.atan2(z.imag, z.real) / TWO_PI) % 1.0)
    return out


def deninger_path(p: LaurentPoly, contour: CirclePath | None = None, n: int = 1024, strict: bool = False) -> DeningerPath:
    """Branch-tracked {x on contour, |y| >= 1} with a closedness decision.

    ``closed`` holds when the curve meets the torus in finitely many points
    and the number of roots with |y| > 1 is the same away from each of them
    (every meeting is a tangential touch, not an exit of the path).
    Collisions of roots on the contour are recorded in ``collisions``; with
    ``strict`` they raise :class:`BranchCollisionError` instead.
    """
    contour = contour or CirclePath()
    q = _recenter(p, contour)
    yp = _YPoly(q)
    inter = torus_intersections(q)
    t0 = np.arange(n) / n
    ts, roots, collisions = _track(yp, np.concatenate([t0, [1.0]]))
    if collisions and strict:
        raise BranchCollisionError(f"roots collide on the contour near t={collisions[0]:.6g}", collisions[0])
    mods = np.abs(roots)
    branch = mods >= 1.0
    touch_t = [(math.atan2(z[0].imag, z[0].real) / TWO_PI) % 1.0 for z in inter]
    away = np.ones(len(ts), dtype=bool)
    for s in touch_t + list(collisions):
        dist = np.minimum(np.abs(ts - s), 1 - np.abs(ts - s))
        away &= dist > 2e-3
    counts = (mods[away] > 1.0).sum(axis=1)
    closed = bool(len(set(counts.tolist())) <= 1)
    raw = sorted(unit_crossings(yp) + _leading_zeros_on_circle(yp) + touch_t + list(collisions))
    merged: list[float] = []
    for s in raw:
        s = 0.0 if s > 1 - 1e-11 or s < 1e-11 else s
        if not merged or s - merged[-1] > 1e-11:
            merged.append(s)
    breaks = tuple(merged)
    base = CirclePath(contour.center, contour.radius, tuple(ts[:-1].tolist()), breaks)
    return DeningerPath(base, ts, roots, branch, closed, inter, collisions, q)


# ---------------------------------------------------------------------------
# eta integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFunction:
    num: LaurentPoly
    den: LaurentPoly

    @classmethod
    def parse(cls, num: str, den: str = "1", bindings=None) -> "RationalFunction":
        n, d = parse_poly(num, bindings), parse_poly(den, bindings)
        if n.is_zero() or d.is_zero():
            raise ValueError("rational function must be nonzero")
        return cls(n, d)

    def log_abs_and_dlog(self, x, y, dx, dy):
        """log|f| and d(log f) along (dx, dy) at numpy arrays x, y."""
        out_log = 0.0
        out_d = 0.0
        for poly, sign in ((self.num, 1.0), (self.den, -1.0)):
            v = poly.evaluate(x, y)
            if np.any(np.abs(v) < 1e-300) or not np.all(np.isfinite(v)):
                raise PathSingularityError("zero or pole of a symbol on the path")
            fx = poly.partial("x").evaluate(x, y) if not poly.partial("x").is_zero() else 0.0
            fy = poly.partial("y").evaluate(x, y) if not poly.partial("y").is_zero() else 0.0
            out_log = out_log + sign * np.log(np.abs(v))
            out_d = out_d + sign * (fx * dx + fy * dy) / v
        return out_log, out_d


@dataclass(frozen=True)
class SymbolPair:
    f: RationalFunction
    g: RationalFunction

    @classmethod
    def parse(cls, f: str, g: str, bindings=None) -> "SymbolPair":
        def one(s):
            if "//" in s:
                a, b = s.split("//", 1)
                return RationalFunction.parse(a, b, bindings)
            return RationalFunction.parse(s, "1", bindings)

        return cls(one(f), one(g))

    def swapped(self) -> "SymbolPair":
        return SymbolPair(self.g, self.f)


def eta_integral(sym: SymbolPair, path: DeningerPath, tol: float = 1e-10) -> float:
    """(1/2 pi) times the integral of log|f| darg g - log|g| darg f over the path.

    The path is parametrized by t in [0,1); at each node every root in the
    |y| >= 1 branch contributes, with dy/dt from implicit differentiation.
    """
    q = path.poly
    yp = _YPoly(q)
    px, py = q.partial("x"), q.partial("y")
    c, r = float(path.base.center), float(path.base.radius)
    # the symbols live on the original coordinates; x_orig = c + r * x_unit
    breaks = list(path.base.breakpoints)
    shift = breaks[0] if breaks else 0.0
    rel = [(b - shift) % 1.0 for b in breaks]

    def integrand(t):
        tt = t + shift
        e = np.exp(2j * np.pi * tt)
        x = e
        dxdt = 2j * np.pi * e
        roots = _roots_rows(yp.coeff_matrix(x))
        X = np.repeat(x[:, None], roots.shape[1], axis=1)
        DX = np.repeat(dxdt[:, None], roots.shape[1], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dydt = -px.evaluate(X, roots) / py.evaluate(X, roots) * DX
        mask = np.abs(roots) >= 1.0
        xo, dxo = c + r * X, r * DX
        lf, dlf = sym.f.log_abs_and_dlog(np.where(mask, xo, 1.5), np.where(mask, roots, 1.5), dxo, dydt)
        lg, dlg = sym.g.log_abs_and_dlog(np.where(mask, xo, 1.5), np.where(mask, roots, 1.5), dxo, dydt)
        dens = lf * np.imag(dlg) - lg * np.imag(dlf)
        return np.where(mask, dens, 0.0).sum(axis=1)

    # tanh-sinh per panel: panel ends carry kinks or log singularities
    nodes = _panels_from(rel)
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += float(tanh_sinh(integrand, a, b, tol=tol, max_level=12).value)
    return total / TWO_PI


# ---------------------------------------------------------------------------
# holomorphic differentials along the loops
# ---------------------------------------------------------------------------

LOOP_KINDS = ("f1_pullback_omega1", "f2_pullback_omega2", "omega1_P", "omega2_R")


@dataclass
class LoopIntegral:
    value: complex
    error: float
    branch_points: list[float]


def _loop_setup(kind: str, k: Fraction):
    """Quadratic in y along the loop, the loop map t -> x, and the numerator g(x).

    The differential is g(x) dx / (a(x) * (y_big - y_small)) where y_big is
    the root on the Deninger path (the one with |y| >= 1).
    """
    if kind in ("f1_pullback_omega1", "f2_pullback_omega2"):
        poly = family("Q", k)
        center = -1.0
        g = (lambda x: (x + 1) ** 2) if kind == "f1_pullback_omega1" else (lambda x: (x * x - 1) / 2)
    elif kind == "omega1_P":
        poly, center, g = family("P", k), 0.0, (lambda x: np.ones_like(x))
    elif kind == "omega2_R":
        poly, center, g = family("R", k), 0.0, (lambda x: 0.5 * np.ones_like(x))
    else:
        raise ValueError(f"unknown loop kind {kind!r}; expected one of {LOOP_KINDS}")
    return _YPoly(poly), center, g


def _discriminant_factors(yp: _YPoly) -> tuple[complex, list[tuple[complex, int]]]:
    """Leading coefficient and (root, multiplicity) pairs of b^2 - 4ac, exactly factored."""
    a, b, c = (yp.exact[2], yp.exact[1], yp.exact[0])
    from . import _upoly

    disc = _upoly.sub(_upoly.mul(b, b), _upoly.scale(_upoly.mul(a, c), 4))
    expr = sum(sympy.Rational(ci.numerator, ci.denominator) * _X ** i for i, ci in enumerate(disc))
    lead, factors = sympy.factor_list(expr, _X)
    roots: list[tuple[complex, int]] = []
    for fac, mult in factors:
        fp = sympy.Poly(fac, _X)
        lead *= fp.LC()
        monic_fp = sympy.Poly(fac / fp.LC(), _X)
        for z in _numeric_roots(monic_fp):
            roots.append((complex(z), int(mult)))
    return complex(lead), roots


def _branch_points_on_loop(roots: list[tuple[complex, int]], center: float) -> list[tuple[float, complex]]:
    """(t, root) for discriminant roots on |x - center| = 1.

    Even-multiplicity roots are not branch points, but the two roots meet
    there and the |y| >= 1 selection switches, so they are panel ends too.
    """
    out = []
    for z, _mult in roots:
        w = z - center
        if abs(abs(w) - 1) < 1e-12:
            out.append(((math.atan2(w.imag, w.real) / TWO_PI) % 1.0, z))
    return sorted(out)


def loop_differential_integral(kind: str, k, tol: float = 1e-12) -> LoopIntegral:
    """Integral of a holomorphic differential over a Deninger loop.

    Kinds: ``f1_pullback_omega1`` and ``f2_pullback_omega2`` on the loop
    x = e^{2 pi i t} - 1 of Q_k; ``omega1_P`` on x_2 = e^{2 pi i t} for P_k;
    ``omega2_R`` on x_0 = e^{2 pi i t} for R_k. The square root is the branch
    fixed by the root with |y| >= 1. Branch points lying on the loop split it
    into panels integrated by tanh-sinh; there the square root is evaluated
    from the factored discriminant, anchored at the branch point, so it keeps
    full relative accuracy right up to the endpoint.
    """
    k = as_rational(k)
    yp, center, g = _loop_setup(kind, k)
    lead, droots = _discriminant_factors(yp)
    bps = _branch_points_on_loop(droots, center)
    for t0, z in bps:
        if dict(droots).get(z, 1) % 2 == 0:
            raise PathSingularityError(f"the differential has a non-integrable pole on the loop at t={t0:.6g}")

    def deninger_gap(x):
        # a * (y_big - y_small) from the stable quadratic
        c = yp.coeff_matrix(x)
        a, b, cc = c[:, 2], c[:, 1], c[:, 0]
        _, _, q, sd = _stable_quadratic(a, b, cc)
        big_is_r1 = np.abs(q) ** 2 >= np.abs(a * cc)
        return np.where(big_is_r1, -sd, sd)

    def factored_sqrt(x, anchor=None, offset=None):
        out = np.full(x.shape, np.sqrt(lead + 0j))
        for z, mult in droots:
            diff = offset if (anchor is not None and z == anchor) else x - z
            out = out * np.sqrt(diff) ** mult
        return out

    def form(x, gap):
        return g(x) / gap * (2j * np.pi * (x - center))

    if not bps:
        res = gauss_legendre_adaptive(lambda t: form(center + np.exp(2j * np.pi * t), deninger_gap(center + np.exp(2j * np.pi * t))), [0.0, 1.0], tol=tol)
        return LoopIntegral(complex(res.value), res.error, [])

    near = 1e-6
    total, err = 0j, 0.0
    cuts = bps + [(bps[0][0] + 1.0, bps[0][1])]
    for (ta, za), (tb, zb) in zip(cuts, cuts[1:]):
        wa, wb = za - center, zb - center

        def point(da, db):
            from_a = da <= db
            xa = center + wa * np.exp(2j * np.pi * da)
            xb = center + wb * np.exp(-2j * np.pi * db)
            return from_a, np.where(from_a, xa, xb)

        def sign_at(d_from_a: float, d_from_b: float) -> float:
            _, x = point(np.array([d_from_a]), np.array([d_from_b]))
            return float(np.sign((deninger_gap(x) / factored_sqrt(x)).real)[0])

        width = tb - ta
        sign_a, sign_b = sign_at(near, width - near), sign_at(width - near, near)

        def f(_t, da, db):
            from_a, x = point(da, db)
            root = np.empty(x.shape, dtype=complex)
            ia, ib = from_a, ~from_a
            root[ia] = factored_sqrt(x[ia], za, wa * np.expm1(2j * np.pi * da[ia]))
            root[ib] = factored_sqrt(x[ib], zb, wb * np.expm1(-2j * np.pi * db[ib]))
            sign = np.sign((deninger_gap(x) / root).real)
            sign = np.where(da < near, sign_a, np.where(db < near, sign_b, sign))
            return form(x, sign * root)

        r = tanh_sinh(f, ta, tb, tol=tol, max_level=12, with_distances=True)
        total += r.value
        err += r.error
    return LoopIntegral(complex(total), err, [t for t, _ in bps])


def period_real_integral(kind: str, k) -> QuadResult:
    """Real-line forms of the period integrals, by tanh-sinh.

    ``omega1_segment``: integral over [e_3, 1] of du / sqrt((1-u)(u+(k-2)/2)(u-e_3)(u-e_4)),
    the segment that the Q_k loop is homologous to for k >= 17.
    ``omega2_ray``: (1/4) * integral over (-inf, k/2] of
    ds / sqrt|(s-k/2)(s-k^2/16)(s-(k^2+16)/16)|, the R_k period.
    """
    k = float(as_rational(k))
    if kind == "omega1_segment":
        root = math.sqrt(k * k - 8 * k)
        e3, e4 = -k / 4 + root / 4, -k / 4 - root / 4

        def f(u, da, db):
            return 1.0 / np.sqrt(db * (u + (k - 2) / 2) * da * (u - e4))

        return tanh_sinh(f, e3, 1.0, tol=1e-13, with_distances=True)
    if kind == "omega2_ray":
        a1, a2, a3 = k / 2, k * k / 16, (k * k + 16) / 16

        # s = k/2 - w^2/(1 - w^2)... use s = k/2 - v/(1-v), v in [0,1)
        def f(v, da, db):
            w = da / db
            s = a1 - w
            jac = 1.0 / (db * db)
            return 0.25 * jac / np.sqrt(w * (a2 - s) * (a3 - s))

        return tanh_sinh(f, 0.0, 1.0, tol=1e-13, with_distances=True)
    raise ValueError(f"unknown real period kind {kind!r}")


# ---------------------------------------------------------------------------
# the u(t) and s(t) curves of the shifted loop
# ---------------------------------------------------------------------------

def u_of_t(t):
    """u = (x + 1/x)/2 along x = e^{2 pi i t} - 1."""
    x = np.exp(2j * np.pi * np.asarray(t, dtype=float)) - 1
    return 0.5 * (x + 1 / x)


def s_of_t(t, k):
    k = float(as_rational(k))
    return (u_of_t(t) + k / 4) ** 2 + k / 2


def real_axis_crossings(curve: Callable[[np.ndarray], np.ndarray], n_scan: int = 4096) -> list[tuple[float, float]]:
    """(t, Re curve(t)) at every sign change of Im curve(t) for t in (0, 1)."""
    t = (np.arange(1, n_scan)) / n_scan
    im = np.imag(curve(t))
    out = []
    for i in np.nonzero(np.sign(im[:-1]) * np.sign(im[1:]) < 0)[0]:
        root = brentq(lambda s: float(np.imag(curve(np.array([s]))[0])), t[i], t[i + 1], xtol=1e-15, rtol=1e-15)
        out.append((root, float(np.real(curve(np.array([root]))[0]))))
    for i in np.nonzero(im == 0)[0]:
        out.append((float(t[i]), float(np.real(curve(t[i:i + 1])[0]))))
    return sorted(out)
