from fractions import Fraction

import pytest

from tlcharges.charges import ChargeDensity
from tlcharges.oracles import (
    WindowTooSmall,
    a_coefficients,
    a_series,
    boost_series,
    charge_decomposition,
    transfer_term,
)
from tlcharges.poly import TauPoly
from tlcharges.verify import commutator_density
from tlcharges.words import time_reverse, word


def density(k, rows):
    return ChargeDensity(k, {word(w): TauPoly.parse(c) for w, c in rows.items()})


def test_first_transfer_term():
    assert transfer_term(1).terms == {word("[0]"): TauPoly.const(1)}


def test_second_transfer_term():
    # e_0 e_1 + e_1 e_0 would be symmetric; the logarithm keeps the commutator
    expected = density(2, {"[0]": "-tau", "[0 1]": "1", "[1 0]": "-1"})
    assert transfer_term(2) == expected


def test_third_transfer_term():
    expected = density(3, {"[0]": "-2+2*tau^2", "[0 1]": "-2*tau", "[1 0]": "4*tau",
                           "[0 1 2]": "2", "[0 2 1]": "-2", "[1 0 2]": "-2", "[2 1 0]": "2"})
    assert transfer_term(3) == expected


@pytest.mark.parametrize("k, windows", [(1, (5, 9)), (2, (8, 12)), (3, (11, 14)), (4, (14,))])
def test_open_window_matches_cluster(k, windows):
    for m in windows:
        assert transfer_term(k, m) == transfer_term(k)


def test_window_guards():
    with pytest.raises(WindowTooSmall):
        transfer_term(3, 10)
    with pytest.raises(WindowTooSmall):
        boost_series(3, 11)


@pytest.mark.parametrize("k", range(1, 6))
def test_transfer_terms_are_conserved(k):
    assert not commutator_density(k, density=transfer_term(k))


def test_boost_examples():
    g = boost_series(4)
    assert g[0] == density(1, {"[0]": "1"})
    assert g[1] == density(2, {"[0 1]": "1", "[1 0]": "-1"})
    assert g[3][word("[0 1]")] == TauPoly.parse("2+tau^2")
    assert g[3][word("[0 1 2]")] == TauPoly.parse("6*tau")
    assert g[3][word("[0 1 2 3]")] == TauPoly.const(6)


@pytest.mark.parametrize("k, small, large", [(3, 12, 16), (4, 16, 20)])
def test_boost_window_stable(k, small, large):
    assert boost_series(k, small) == boost_series(k, large)


def test_a_series_examples():
    a3 = a_series(3).scale(2)
    assert a3[word("[0 1]")] == TauPoly.parse("tau")
    assert a3[word("[0 1 2]")] == TauPoly.const(2)
    assert a_series(4)[word("[0 1]")] == TauPoly.parse("-1-tau^2")
    assert a_series(6)[word("[0 1]")] == TauPoly.parse("1+3*tau^2+3*tau^4")


@pytest.mark.parametrize("k", range(2, 7))
def test_a_series_symmetry(k):
    a = a_series(k)
    sign = 1 if k % 2 else -1
    for p, c in a.items():
        assert a[time_reverse(p)] == c * sign


def test_a_coefficients_shape():
    # A_2 = T_2 + tau T_1 drops the single-generator term
    assert a_coefficients(2) == (TauPoly.parse("tau"),)
    assert a_series(2) == density(2, {"[0 1]": "1", "[1 0]": "-1"})
    for k in range(3, 7):
        for i, c in enumerate(a_coefficients(k), 1):
            assert all(p % 2 == 1 and p <= 2 * i - 1 for _, p in c.terms())


# A_k = sum_j c_j tau^j Q_{k-j}, rational c_j
A_DECOMPOSITION = {
    2: {0: "1/2"},
    3: {0: "1/2", 2: "-tau^2/2"},
    4: {0: "1/2", 2: "-tau^2/2"},
    5: {0: "1/2", 2: "-tau^2", 4: "tau^4"},
    6: {0: "1/2", 2: "-3*tau^2/2", 4: "3*tau^4/2"},
    7: {0: "1/2", 2: "-9*tau^2/4", 4: "17*tau^4/4", 6: "-17*tau^6/4"},
}


@pytest.mark.parametrize("k", range(2, 8))
def test_a_series_is_a_charge_combination(k):
    got = charge_decomposition(a_series(k))
    assert {j: str(c) for j, c in got.items() if c} == A_DECOMPOSITION[k]
    assert got[0].coeff(0) == Fraction(1, 2)


@pytest.mark.parametrize("k", range(2, 6))
def test_boost_series_is_a_charge_combination(k):
    got = charge_decomposition(boost_series(k)[-1], tau_coefficients=True)
    assert got[0] and got[0].degree == 0
