"""Elliptic curves over Q: models, group law, lattices and divisors."""
from __future__ import annotations

from .curves import (
    O,
    CurvePoint,
    OffCurveError,
    SingularCurveError,
    WeierstrassCurve,
    add,
    curve,
    mul,
    negate,
    point_P,
    point_S,
    point_T,
    point_U,
    singular_parameters,
    sub,
    torsion_order,
)
from .divisors import (
    Divisor,
    DivisorClass,
    RationalFunctionOnCurve,
    ZeroFunctionError,
    class_of,
    diamond,
    divisor_of,
    expected_lemma_divisors,
    lemma_functions,
    regulator_combination,
)
from .lattice import (
    EllipticLogError,
    LatticeError,
    PeriodLattice,
    elliptic_log,
    periods,
    point_from_u,
    wp,
    wp_prime,
)
