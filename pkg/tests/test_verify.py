import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import tl1_words
from tlcharges.charges import ChargeDensity, build_charge, triangle_solution, z_value
from tlcharges.diagram import compose, generator_diagram, tl1_diagram
from tlcharges.oracles import a_series
from tlcharges.poly import ZERO, TauPoly
from tlcharges.verify import (
    ALL_CODES,
    FOLLOWING,
    PRECEDING,
    check_identities,
    check_reachable,
    code_balance,
    code_rows,
    commutator_density,
    contribution,
    lot_table,
    mirror_code,
    parametric_total,
    s_direct,
    s_env,
    table_negation_failures,
    up_triangle_failures,
)
from tlcharges.words import EnvCode, classify_environments, enumerate_candidates, from_sequence, word

LONG_WORD = word("[2 1 3 4 10 9 8 7 6 11 13 12 17 20 19]")


def random_z(k: int, seed: int):
    """An arbitrary integer table: conservation fails, but both S_k routes must agree."""
    rnd = random.Random(seed)
    table = {(w, t): Fraction(rnd.randint(-5, 5)) for w in range(1, k + 1) for t in range(w)}

    def z(kk, w, t):
        if kk != k:
            return Fraction(z_value(kk, w, t))
        return table.get((w, t), Fraction(0))

    return z


def patched_z(k, w0, t0, delta=1):
    def z(kk, w, t):
        return z_value(kk, w, t) + (delta if (kk, w, t) == (k, w0, t0) else 0)

    return z


@pytest.mark.parametrize("k", range(1, 7))
def test_charges_commute_with_h(k):
    assert not commutator_density(k)


def test_flipped_coefficient_is_caught():
    q3 = build_charge(3).terms.copy()
    q3[word("[0 1]")] = -q3[word("[0 1]")]
    assert commutator_density(3, density=ChargeDensity(3, q3))


def test_offsets_outside_window_commute():
    for q in enumerate_candidates(5):
        dq = tl1_diagram(q)
        for sigma in (q.lo - 3, q.lo - 2, q.hi + 2, q.hi + 3):
            e = generator_diagram(sigma)
            assert compose(dq, e) == compose(e, dq)


@pytest.mark.parametrize("k", range(2, 7))
def test_reachable_words(k):
    report = check_reachable(k)
    assert report.ok and 0 < report.tl1_words <= report.checked


@settings(max_examples=6)
@given(st.integers(3, 5), st.integers(0, 10 ** 6))
def test_routes_agree_for_arbitrary_tables(k, seed):
    z = random_z(k, seed)
    report = check_reachable(k, z, expect_zero=False)
    assert not report.disagreements


def test_doubled_generator_gives_zero():
    assert s_direct(5, from_sequence([1, 0, 2, 1])) == ZERO
    assert s_direct(5, from_sequence([2, 1, 0, 3, 2])) == ZERO


def test_out_of_reach_gives_zero():
    for k in (3, 4, 5):
        p = word("[" + " ".join(str(i) for i in range(k + 2)) + "]")
        assert s_direct(k, p) == ZERO == s_env(k, p)


def test_isolated_single_generator():
    assert s_env(5, word("[0]")) == ZERO
    assert contribution("L3R3", 5, (1, 0, 0, 0)) == ZERO


def test_long_word():
    codes = [c.value for _, c in classify_environments(LONG_WORD)]
    assert "L2R1" in codes
    assert s_direct(16, LONG_WORD) == ZERO == s_env(16, LONG_WORD)


def test_l2r1_routes_agree_off_shell():
    p = word("[0 3 5]")
    assert [c.value for _, c in classify_environments(p)][1] == "L2R1"
    z = random_z(6, 7)
    assert s_direct(6, p, z) == s_env(6, p, z)


def test_table_negation():
    assert table_negation_failures() == []
    for code, rows in PRECEDING.items():
        assert FOLLOWING[mirror_code(code)] == tuple(r._replace(sign=-r.sign) for r in rows)


def test_code_rows_cover_all_codes():
    for code in ALL_CODES:
        assert code_rows(code)
    with pytest.raises(KeyError):
        code_rows("PF")


@given(tl1_words(max_width=12))
def test_codes_balance(p):
    assert all(v == 0 for v in code_balance(p).values())
    assert parametric_total(p) == (0, 0, 0, 0)


@pytest.mark.parametrize("k", range(3, 7))
def test_identities_hold(k):
    report = check_identities(k)
    assert report.ok, report.as_dict()
    # from k = 4 on every identity has an in-range tuple to test
    assert k < 4 or all(n > 0 for n in report.checked.values())
    assert report.solution_checked > 0


def test_identity_mutation():
    report = check_identities(6, patched_z(6, 4, 2))
    assert not report.ok
    name, params, _ = report.first_violation
    assert name == "PL3+FR1+L1R3"
    assert commutator_density(6, patched_z(6, 4, 2))


def test_alternative_triangle_solution_is_conserved():
    for k in range(2, 6):
        w = max(k - 1, 1)
        z = triangle_solution(k, {w: Fraction(z_value(k, w, 0) + 7)})
        assert build_charge(k, z) != build_charge(k)
        assert not commutator_density(k, z)


# leading-order tables of the symmetrised series, row w, t = 0, 1, ...
LOT6 = {
    6: ["1", "-1", "1", "-1", "1", "-1"],
    5: ["2", "-1", "0", "1", "-2"],
    4: ["-2", "3", "-3", "2"],
    3: ["-3", "0", "3"],
    2: ["3", "-3"],
    1: ["0"],
}
LOT7 = {
    7: ["1", "-1", "1", "-1", "1", "-1", "1"],
    6: ["5/2", "-3/2", "1/2", "1/2", "-3/2", "5/2"],
    5: ["-5/2", "4", "-9/2", "4", "-5/2"],
    4: ["-25/4", "9/4", "9/4", "-25/4"],
    3: ["25/4", "-17/2", "25/4"],
    2: ["17/4", "17/4"],
    1: ["-17/4"],
}


@pytest.mark.parametrize("k, expected", [(6, LOT6), (7, LOT7)])
def test_lot_tables(k, expected):
    table = lot_table(a_series(k))
    for w, row in expected.items():
        assert [table.get((w, t), 0) for t in range(w)] == [Fraction(x) for x in row]
    assert up_triangle_failures(table, k) == []


def test_lot_detects_broken_triangle():
    table = lot_table(a_series(6))
    table[4, 1] += 1
    assert up_triangle_failures(table, 6)


def test_s_env_rejects_general_words():
    with pytest.raises(TypeError):
        s_env(3, from_sequence([1, 0, 2, 1]))


def test_envcode_enum_matches_tables():
    assert {c.value for c in EnvCode} == set(ALL_CODES)
    assert TauPoly() == ZERO
