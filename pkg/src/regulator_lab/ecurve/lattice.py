"""Period lattices, the Weierstrass function and complex elliptic logarithms.

Lattices follow the real structure of a curve over Q: ``omega1`` is the
least positive real period and ``tau = omega2/omega1`` has Im tau > 0 and
|Re tau| <= 1/2. All series run in q = exp(2 pi i tau).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import mpmath

from .curves import CurvePoint, WeierstrassCurve, _mp

EISENSTEIN_RTOL = 1e-15


class LatticeError(RuntimeError):
    pass


class EllipticLogError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodLattice:
    omega1: mpmath.mpc
    omega2: mpmath.mpc
    curve: WeierstrassCurve
    dps: int = 30

    @property
    def tau(self) -> mpmath.mpc:
        return self.omega2 / self.omega1

    @property
    def q(self) -> mpmath.mpc:
        return mpmath.exp(2j * mpmath.pi * self.tau)

    def normalize(self, u) -> mpmath.mpc:
        """u reduced to omega1*([0,1) + tau*[0,1))."""
        a, b = self.coordinates(u)
        a, b = a - mpmath.floor(a), b - mpmath.floor(b)
        # snap to the boundary so that lattice points reduce to 0
        tol = mpmath.mpf(10) ** (-(self.dps // 2))
        a = 0 if abs(a - 1) < tol else a
        b = 0 if abs(b - 1) < tol else b
        return self.omega1 * (a + b * self.tau)

    def coordinates(self, u) -> tuple[mpmath.mpf, mpmath.mpf]:
        """Real (a, b) with u = omega1 * (a + b tau)."""
        v = mpmath.mpc(u) / self.omega1
        b = mpmath.im(v) / mpmath.im(self.tau)
        a = mpmath.re(v) - b * mpmath.re(self.tau)
        return a, b


def _agm(a, b, tol):
    """Complex AGM with the optimal (right) choice of square root at each step."""
    for _ in range(200):
        if abs(a - b) <= tol * abs(a):
            return (a + b) / 2
        a1 = (a + b) / 2
        b1 = mpmath.sqrt(a * b)
        if abs(a1 - b1) > abs(a1 + b1):
            b1 = -b1
        a, b = a1, b1
    raise LatticeError("AGM did not converge")


def _short_roots(curve: WeierstrassCurve):
    g2, g3 = curve.g2_g3
    return mpmath.polyroots([4, 0, -_mp(g2), -_mp(g3)], maxsteps=400, extraprec=2 * mpmath.mp.dps)


def eisenstein_g2_g3(omega1, tau, terms: int | None = None):
    """g2, g3 of the lattice Z omega1 + Z omega1 tau from q-expansions."""
    q = mpmath.exp(2j * mpmath.pi * tau)
    s3 = s5 = mpmath.mpc(0)
    qn = mpmath.mpc(1)
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps - 5)
    n = 0
    while True:
        n += 1
        qn *= q
        if abs(qn) * n ** 6 < eps or (terms is not None and n > terms):
            break
        s3 += n ** 3 * qn / (1 - qn)
        s5 += n ** 5 * qn / (1 - qn)
    c = 2 * mpmath.pi / omega1
    g2 = c ** 4 / 12 * (1 + 240 * s3)
    g3 = c ** 6 / 216 * (1 - 504 * s5)
    return g2, g3


def _normalize_basis(w1, w2):
    """Real period first, Im tau > 0, |Re tau| <= 1/2 (only tau -> tau + n moves)."""
    tau = w2 / w1
    if mpmath.im(tau) < 0:
        w2, tau = -w2, -tau
    n = mpmath.nint(mpmath.re(tau))
    return w1, w2 - n * w1


def periods(curve: WeierstrassCurve, dps: int = 30) -> PeriodLattice:
    """Period lattice by the complex AGM, validated against Eisenstein series.

    Real discriminant sign decides the shape: three real roots give a
    rectangular lattice with omega1 = pi/AGM(sqrt(e1-e3), sqrt(e1-e2)); one
    real root gives omega1 = 2 pi/AGM(2 sqrt(b), sqrt(2b + 3 e1)) with
    b = sqrt(3 e1^2 - g2/4) and Re tau = 1/2. Any candidate basis is
    accepted only when its Eisenstein g2, g3 reproduce the curve's.
    """
    if curve.is_singular:
        raise LatticeError("singular curve has no period lattice")
    with mpmath.workdps(dps + 10):
        g2c, g3c = (_mp(g) for g in curve.g2_g3)
        tol = mpmath.mpf(10) ** (-(dps + 5))
        roots = _short_roots(curve)
        real = [r for r in roots if abs(mpmath.im(r)) < mpmath.mpf(10) ** (-dps)]
        candidates = []
        if curve.discriminant > 0:
            e1, e2, e3 = sorted((mpmath.re(r) for r in roots), reverse=True)
            w1 = mpmath.pi / _agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2), tol)
            w2 = 1j * mpmath.pi / _agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3), tol)
            candidates.append((mpmath.mpc(w1), mpmath.mpc(w2)))
        else:
            e1 = mpmath.re(real[0])
            beta = mpmath.sqrt(3 * e1 * e1 - g2c / 4)
            w1 = 2 * mpmath.pi / _agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + 3 * e1), tol)
            w2 = -w1 / 2 + 1j * mpmath.pi / _agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta - 3 * e1), tol)
            candidates.append((mpmath.mpc(w1), mpmath.mpc(w2)))
        # generic fallback: AGM over root orderings
        for a, b, c in itertools.permutations(roots):
            try:
                wa = mpmath.pi / _agm(mpmath.sqrt(a - c), mpmath.sqrt(a - b), tol)
                wb = 1j * mpmath.pi / _agm(mpmath.sqrt(a - c), mpmath.sqrt(b - c), tol)
            except (LatticeError, ZeroDivisionError):
                continue
            candidates.append((wa, wb))
        scale = max(abs(g2c), abs(g3c), 1)
        for w1, w2 in candidates:
            w1, w2 = _normalize_basis(w1, w2)
            if mpmath.im(w2 / w1) <= 0:
                continue
            g2, g3 = eisenstein_g2_g3(w1, w2 / w1)
            if abs(g2 - g2c) + abs(g3 - g3c) <= EISENSTEIN_RTOL * scale:
                return PeriodLattice(+w1, +w2, curve, dps)
    raise LatticeError("no AGM candidate reproduced the curve's invariants")


# ---------------------------------------------------------------------------
# Weierstrass functions
# ---------------------------------------------------------------------------

def _series_setup(u, lattice: PeriodLattice):
    u = lattice.normalize(u)
    v = u / lattice.omega1
    z = mpmath.exp(2j * mpmath.pi * v)
    return z, lattice.q, 2j * mpmath.pi / lattice.omega1


def _bilateral(term, z, q, eps):
    """Sum over n in Z of term(q^n z); n >= 0 then n < 0, both geometric in |q|."""
    total = term(z)
    for sign in (1, -1):
        qn = mpmath.mpc(1)
        step = q if sign == 1 else 1 / q
        for _ in range(10_000):
            qn *= step
            t = term(qn * z)
            total += t
            if abs(t) < eps * max(1, abs(total)):
                break
    return total


def wp(u, lattice: PeriodLattice) -> mpmath.mpc:
    """Weierstrass p(u) for the lattice (short model y^2 = 4x^3 - g2 x - g3)."""
    z, q, c = _series_setup(u, lattice)
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps - 3)
    s = _bilateral(lambda w: w / (1 - w) ** 2, z, q, eps)
    tail = mpmath.mpc(0)
    qn = mpmath.mpc(1)
    for n in range(1, 10_000):
        qn *= q
        t = qn / (1 - qn) ** 2
        tail += t
        if abs(t) < eps:
            break
    return c * c * (mpmath.mpf(1) / 12 + s - 2 * tail)


def wp_prime(u, lattice: PeriodLattice) -> mpmath.mpc:
    z, q, c = _series_setup(u, lattice)
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps - 3)
    return c ** 3 * _bilateral(lambda w: w * (1 + w) / (1 - w) ** 3, z, q, eps)


def point_from_u(u, lattice: PeriodLattice) -> CurvePoint:
    """The curve point with elliptic logarithm u."""
    if abs(lattice.normalize(u)) == 0:
        return CurvePoint.infinity()
    return lattice.curve.from_short(wp(u, lattice), wp_prime(u, lattice))


def elliptic_log(pt: CurvePoint, lattice: PeriodLattice, rtol: float = 1e-10) -> mpmath.mpc:
    """u with (p(u), p'(u)) equal to the point's short coordinates, reduced mod the lattice.

    Carlson's R_F gives u with p(u) = x' up to sign; the sign is fixed by
    comparing p'(u) with y'. If the reconstruction misses, Newton steps on
    p(u) - x' finish the job.
    """
    if pt.is_infinity:
        return mpmath.mpc(0)
    curve = lattice.curve
    with mpmath.workdps(lattice.dps + 10):
        xs, ys = curve.to_short(pt.numeric())
        xs, ys = mpmath.mpc(xs), mpmath.mpc(ys)
        e = _short_roots(curve)
        u = mpmath.elliprf(xs - e[0], xs - e[1], xs - e[2])

        def residual(v):
            return abs(wp(v, lattice) - xs) / max(1, abs(xs)), abs(wp_prime(v, lattice) - ys) / max(1, abs(ys))

        best = None
        for cand in (u, -u):
            rx, ry = residual(cand)
            if best is None or rx + ry < best[0]:
                best = (rx + ry, cand)
        err, u = best
        if err > rtol:
            for _ in range(60):
                step = (wp(u, lattice) - xs) / wp_prime(u, lattice)
                u -= step
                if abs(step) < mpmath.mpf(10) ** (-lattice.dps) * max(1, abs(u)):
                    break
            rx, ry = residual(u)
            if ry > rtol:
                u = -u
                rx, ry = residual(u)
            err = rx + ry
        if err > rtol:
            raise EllipticLogError(f"reconstruction residual {mpmath.nstr(err, 5)} exceeds {rtol}")
        return lattice.normalize(u)
