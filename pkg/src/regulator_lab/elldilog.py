"""Bloch-Wigner dilogarithm and its elliptic average over q^Z."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .ecurve.divisors import DivisorClass
from .ecurve.lattice import PeriodLattice

TRUNCATION = 1e-18


def bloch_wigner(z) -> float:
    """D(z) = Im Li2(z) + arg(1 - z) log|z|, extended by 0 at 0, 1 and infinity."""
    z = mpmath.mpc(z)
    if z == 0 or z == 1 or mpmath.isinf(abs(z)):
        return 0.0
    # D(1/z) = -D(z) keeps polylog inside the unit disk where it converges fastest
    if abs(z) > 1:
        return -bloch_wigner(1 / z)
    val = mpmath.im(mpmath.polylog(2, z)) + mpmath.arg(1 - z) * mpmath.log(abs(z))
    return float(val)


def _bw_mp(z):
    if z == 0 or z == 1:
        return mpmath.mpf(0)
    if abs(z) > 1:
        return -_bw_mp(1 / z)
    return mpmath.im(mpmath.polylog(2, z)) + mpmath.arg(1 - z) * mpmath.log(abs(z))


@dataclass(frozen=True)
class EllipticDilogValue:
    value: float
    tail_bound: float
    terms: int


def _normalized_v(u, lattice: PeriodLattice):
    a, b = lattice.coordinates(u)
    a, b = a - mpmath.floor(a), b - mpmath.floor(b)
    return a + b * lattice.tau, a, b


def elliptic_dilog_detail(u, lattice: PeriodLattice, cutoff: float = TRUNCATION) -> EllipticDilogValue:
    """Sum of D(z q^l) over l in Z with z = exp(2 pi i u/omega1).

    u/omega1 is first reduced so that 0 <= Im v < Im tau; then |z q^l| < 1
    for l >= 1 and > 1 for l <= -1, and both tails shrink like |q|^|l|.
    Truncation stops once |q|^|l| < cutoff. For small |w|, |D(w)| <=
    |w| (1 + |log|w||) bounds the neglected terms.
    """
    with mpmath.workdps(max(lattice.dps, 20)):
        v, a, b = _normalized_v(u, lattice)
        if _on_lattice(a, b):
            return EllipticDilogValue(0.0, 0.0, 0)
        q = lattice.q
        aq = abs(q)
        z = mpmath.exp(2j * mpmath.pi * v)
        total = _bw_mp(z)
        n = 0
        w_up, w_dn = z, 1 / z
        while True:
            n += 1
            w_up *= q
            w_dn *= q
            # D(z q^-n) = -D(q^n / z)
            total += _bw_mp(w_up) - _bw_mp(w_dn)
            if aq ** n < cutoff:
                break
        # remainder over l > n for both directions
        r = aq ** (n + 1) / (1 - aq)
        tail = 2 * r * max(abs(z), 1 / abs(z)) * (1 + abs(mpmath.log(aq)) * (n + 2) + abs(mpmath.log(abs(z))))
        return EllipticDilogValue(float(total), float(tail), 2 * n + 1)


def _on_lattice(a, b, tol=1e-14) -> bool:
    return min(a, 1 - a) < tol and min(b, 1 - b) < tol


def elliptic_dilog(u, lattice: PeriodLattice) -> float:
    return elliptic_dilog_detail(u, lattice).value


def dilog_of_class(c: DivisorClass, lattice: PeriodLattice | None = None) -> float:
    """Linear extension of the elliptic dilogarithm to a divisor class."""
    lattice = lattice if lattice is not None else c.lattice
    own = c.lattice
    total = 0.0
    for (a, b), m in c.coordinates():
        u = own.omega1 * (a + b * own.tau)
        total += m * elliptic_dilog(u, lattice)
    return total
