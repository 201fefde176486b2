from math import factorial

import pytest
from hypothesis import given, strategies as st

from troprank.parameters import (BOTH, INJECTIVE, SURJECTIVE, ParameterError,
                                 ParameterQuadruple, classify_range, from_grdm, from_rsrho,
                                 target_size)


def binom(n, k):
    return factorial(n) // (factorial(k) * factorial(n - k))


@pytest.mark.parametrize("rsrhom, g, d", [
    ((3, 2, 0, 3), 8, 9),
    ((2, 1, 0, 3), 3, 4),
    ((1, 1, 0, 1), 2, 2),
    ((4, 3, 1, 3), 16, 17),
    ((5, 5, 0, 3), 30, 30),
])
def test_genus_and_degree(rsrhom, g, d):
    p = from_rsrho(*rsrhom)
    assert (p.g, p.d) == (g, d)


@pytest.mark.parametrize("bad", [(0, 1, 0, 3), (2, 0, 0, 3), (2, 1, -1, 3), (2, 1, 0, 0)])
def test_rejects_out_of_range(bad):
    with pytest.raises(ParameterError):
        from_rsrho(*bad)


def test_grdm_rejects_impossible():
    with pytest.raises(ParameterError):
        from_grdm(3, 2, 5, 3)       # d >= g + r gives s < 1
    with pytest.raises(ParameterError):
        from_grdm(3, 2, 2, 3)       # s = 3 needs g >= 9


def test_example_is_both():
    rc = classify_range(from_rsrho(3, 2, 0, 3))
    assert rc.kind == BOTH
    assert rc.binom == rc.sections == 20 == binom(6, 3) == 3 * 9 - 8 + 1


@pytest.mark.parametrize("m", range(2, 9))
def test_canonical_target(m):
    p = from_rsrho(2, 1, 0, m)
    assert target_size(p) == 4 * m - 2
    assert classify_range(p).kind in (SURJECTIVE, BOTH)


def test_rank5_injective():
    rc = classify_range(from_rsrho(5, 5, 0, 3))
    assert rc.kind == INJECTIVE
    assert rc.target_size == binom(8, 3) == 56


def test_as_dict_echoes_everything():
    assert from_rsrho(3, 1, 2, 3).as_dict() == {"r": 3, "s": 1, "rho": 2, "m": 3, "g": 6, "d": 8}


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(1, 6))
def test_grdm_roundtrip(r, s, rho, m):
    p = from_rsrho(r, s, rho, m)
    assert from_grdm(p.g, p.r, p.d, m) == p
    assert p.s == p.g - p.d + p.r
    assert p.rho == p.g - (p.r + 1) * p.s


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(1, 6))
def test_classification_matches_definition(r, s, rho, m):
    p = ParameterQuadruple(r, s, rho, m)
    rc = classify_range(p)
    b, sec = binom(r + m, m), m * p.d - p.g + 1
    assert (rc.binom, rc.sections) == (b, sec)
    assert rc.injective == (b <= sec)
    assert rc.surjective == (b >= sec)
    assert rc.target_size == min(b, sec)


def test_range_monotonicity():
    for r in range(1, 7):
        for s in range(1, 7):
            for rho in range(0, 7):
                for m in range(1, 5):
                    rc = classify_range(ParameterQuadruple(r, s, rho, m))
                    if rc.injective:
                        assert classify_range(ParameterQuadruple(r, s, rho + 1, m)).injective
                        assert classify_range(ParameterQuadruple(r, s + 1, rho, m)).injective
                    if rc.surjective and r >= s:
                        assert classify_range(ParameterQuadruple(r + 1, s, rho, m)).surjective
