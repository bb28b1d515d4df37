from __future__ import annotations

import math

import numpy as np
import pytest
import sympy

from regulator_lab.ecurve import WeierstrassCurve, curve
from regulator_lab.lseries import (
    _ap_bsgs, _invariants, an_list, ap, conductor, l_at_2, lseries_data, minimal_model, partial_sum_l2,
)


def brute_ap(E: WeierstrassCurve, p: int) -> int:
    a1, a2, a3, a4, a6 = (int(c) for c in E.ainvs)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return p + 1 - n


@pytest.mark.parametrize("ainvs,N", [((0, -1, 1, -10, -20), 11), ((0, 0, 1, -1, 0), 37), ((0, 1, 1, -2, 0), 389),
                                     ((0, 0, 0, -1, 0), 32), ((0, 0, 0, -4, 0), 64), ((0, 0, 1, 0, -7), 27)])
def test_conductors_of_known_curves(ainvs, N):
    assert conductor(WeierstrassCurve(*ainvs)) == N


@pytest.mark.parametrize("k,N", [(-1, 15), (-4, 24), (-8, 48), (-12, 15)])
def test_family_conductors(k, N):
    assert conductor(curve("Ek", k)) == N


@pytest.mark.parametrize("p", [2, 7, 11, 13, 97])
def test_ap_against_point_count(p):
    E = minimal_model(WeierstrassCurve(0, 0, 1, -1, 0))
    assert ap(E, p) == brute_ap(E, p)


def test_bsgs_matches_enumeration():
    E = minimal_model(curve("Ek", -1))
    a = tuple(int(c) for c in E.ainvs)
    *_, c4, c6, _ = _invariants(a)
    for p in (20011, 20021, 30011):
        assert _ap_bsgs(c4, c6, p) == ap(E, p)
        assert abs(ap(E, p)) <= 2 * math.sqrt(p)


def test_hecke_recursion_to_ten_thousand():
    data = lseries_data(curve("Ek", -4), nmax=10_000)
    an, N = data.coefficients, data.conductor
    for p in sympy.primerange(2, 100):
        p = int(p)
        pk = p
        while pk * p <= 10_000:
            want = an[p] * an[pk] - (0 if N % p == 0 else p * an[pk // p])
            assert an[pk * p] == want
            pk *= p
    rng = np.random.default_rng(1)
    for _ in range(2000):
        m, n = rng.integers(1, 100, size=2)
        if math.gcd(int(m), int(n)) == 1:
            assert an[m * n] == an[m] * an[n]


@pytest.mark.slow
def test_l2_against_partial_sum():
    data = lseries_data(curve("Ek", -1))
    E = data.curve
    an = an_list(E, 1_000_000, data.local)
    l2, tail = l_at_2(data)
    # the partial sum to 10^6 converges like O(log n / n)
    assert abs(partial_sum_l2(an) - l2) < 1e-5
    assert tail < 1e-12
