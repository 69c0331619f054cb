"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are printed past output capture) or directly with
``python tests/test_acceptance.py``.  Criteria with a clause that cannot hold
print FAIL; pytest tracks those clauses as strict xfails so a change in
behaviour is noticed.
"""

from __future__ import annotations

import cmath
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from tlcharges.charges import build_charge, triangle_check
from tlcharges.fixtures import KS, diff, load_fixture
from tlcharges.matrep import (
    ChainParams,
    Twist,
    charge_matrix,
    commutator_norm,
    logderiv_check,
    relations_check,
    span_residual,
    tl_hamiltonian,
    transfer_terms_numeric,
    xxz_hamiltonian,
)
from tlcharges.oracles import a_series, boost_series, transfer_term
from tlcharges.poly import TauPoly
from tlcharges.verify import (
    check_identities,
    check_reachable,
    commutator_density,
    lot_table,
    table_negation_failures,
    up_triangle_failures,
)
from tlcharges.words import mirror, time_reverse, word

UNIT_Q = cmath.exp(1j * cmath.pi / 5)


@dataclass
class Outcome:
    number: int
    title: str
    clauses: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    def line(self) -> str:
        failed = [c for c, ok in self.clauses.items() if not ok]
        tail = "; ".join(self.notes)
        if failed:
            tail = f"failed: {', '.join(failed)}; {tail}"
        return f"{'PASS' if self.ok else 'FAIL'} criterion {self.number:2d} ({self.title}): {tail}"


_printed: set[int] = set()


def announce(out: Outcome, capsys=None) -> None:
    if out.number in _printed:
        return
    _printed.add(out.number)
    if capsys is None:
        print(out.line(), flush=True)
        return
    with capsys.disabled():
        print("\n" + out.line(), flush=True)


# ---- criteria --------------------------------------------------------------

@lru_cache(maxsize=None)
def criterion_1() -> Outcome:
    out = Outcome(1, "Q tables")
    start = time.perf_counter()
    reports = [diff(load_fixture("Q", k), build_charge(k)) for k in KS]
    elapsed = time.perf_counter() - start
    out.clauses["bit-exact k=2..7"] = all(r.ok for r in reports)
    out.clauses["under 1 s"] = elapsed < 1.0
    spot = {("[0 1 2]", 5): "-2+tau^2", ("[3 2 1 0]", 6): "2-2*tau^2", ("[0 3]", 7): "2*tau"}
    out.clauses["spot values"] = all(build_charge(k)[word(w)] == TauPoly.parse(c) for (w, k), c in spot.items())
    out.notes.append(f"{elapsed:.2f} s")
    return out


@lru_cache(maxsize=None)
def criterion_2() -> Outcome:
    out = Outcome(2, "symbolic [Q_k, H] = 0")
    start = time.perf_counter()
    sizes = {}
    for k in range(1, 9):
        comm = commutator_density(k)
        out.clauses[f"k={k}"] = not comm
        sizes[k] = len(comm.reachable)
    elapsed = time.perf_counter() - start
    out.clauses["under 5 min"] = elapsed < 300
    out.notes.append(f"k<=8 in {elapsed:.1f} s, {sizes[8]} reachable classes at k=8")
    return out


GENERAL_TWIST = Twist.general(Fraction(2), Fraction(1), Fraction(3), Fraction(2))


@lru_cache(maxsize=None)
def criterion_3() -> Outcome:
    out = Outcome(3, "matrix [Q_k, H] = 0")
    twists = {"none": Twist.none(), "diag 2": Twist.diagonal(Fraction(2)), "general SL(2)": GENERAL_TWIST}
    for name, twist in twists.items():
        bad = set()
        for L in (8, 10):
            for q in (Fraction(3, 2), Fraction(7, 3)):
                p = ChainParams(L, q, twist)
                h = tl_hamiltonian(p)
                for k in range(1, 6):
                    if commutator_norm(charge_matrix(k, p), h) != 0.0:
                        bad.add(k)
        out.clauses[f"exact, twist {name}"] = not bad
        if bad:
            out.notes.append(f"twist {name} leaves [Q_k, H] != 0 for k in {sorted(bad)} at every L and q")
    p = ChainParams(12, UNIT_Q)
    h = tl_hamiltonian(p)
    worst = 0.0
    for k in range(1, 6):
        c = charge_matrix(k, p)
        worst = max(worst, commutator_norm(c, h) / (c.norm() * h.norm()))
    out.clauses["float L=12"] = worst < 1e-10
    out.notes.insert(0, f"float L=12 worst relative {worst:.1e}")
    return out


@lru_cache(maxsize=None)
def criterion_4() -> Outcome:
    out = Outcome(4, "triangle equation")
    for k in range(1, 13):
        out.clauses[f"k={k}"] = triangle_check(k)
    out.notes.append("k<=12 exact")
    return out


@lru_cache(maxsize=None)
def criterion_5() -> Outcome:
    out = Outcome(5, "word counting")
    totals = {}
    length_ok = True
    for k in range(1, 11):
        q = build_charge(k)
        totals[k] = len(q)
        length_ok &= sum(1 for p in q if len(p) == k) == 2 ** (k - 1)
    out.clauses["2^(k-1) words of length k"] = length_ok
    over = [k for k, n in totals.items() if n >= 2 ** k]
    out.clauses["fewer than 2^k words in total"] = not over
    if over:
        out.notes.append("totals " + ", ".join(f"k={k}: {totals[k]} >= {2 ** k}" for k in over))
    else:
        out.notes.append("all totals below 2^k")
    return out


@lru_cache(maxsize=None)
def criterion_6() -> Outcome:
    out = Outcome(6, "time reversal and reflection")
    for k in range(1, 9):
        q = build_charge(k)
        sign = 1 if k % 2 else -1
        out.clauses[f"k={k}"] = all(q[time_reverse(p)] == c * sign and q[mirror(p)] == c * sign
                                    for p, c in q.items())
    out.notes.append("k<=8")
    return out


@lru_cache(maxsize=None)
def criterion_7() -> Outcome:
    out = Outcome(7, "boost oracle vs G tables")
    for k in KS:
        out.clauses[f"G_{k}"] = diff(load_fixture("G", k), boost_series(k)[-1]).ok
    out.clauses["G_4 [0 1 2 3] = 6"] = boost_series(4)[-1][word("[0 1 2 3]")] == TauPoly.const(6)
    out.notes.append("G_2..G_7 bit-exact")
    return out


@lru_cache(maxsize=None)
def criterion_8() -> Outcome:
    out = Outcome(8, "transfer/A oracle vs A tables")
    for k in KS:
        out.clauses[f"A_{k}"] = diff(load_fixture("A", k), a_series(k)).ok
    out.clauses["A_4 [0 1]"] = a_series(4)[word("[0 1]")] == TauPoly.parse("-1-tau^2")
    out.clauses["4A_7 [0 1]"] = a_series(7).scale(4)[word("[0 1]")] == TauPoly.parse("2*tau+9*tau^3+17*tau^5")
    out.clauses["first transfer term"] = transfer_term(1).terms == {word("[0]"): TauPoly.const(1)}
    out.notes.append("A_2..A_7 after normalization")
    return out


@lru_cache(maxsize=None)
def criterion_9() -> Outcome:
    out = Outcome(9, "proof machinery")
    checked = 0
    for k in range(1, 9):
        r = check_reachable(k)
        checked += r.checked
        out.clauses[f"s_env = s_direct = 0, k={k}"] = r.ok
    for k in range(4, 9):
        rep = check_identities(k)
        out.clauses[f"identities and parametrization, k={k}"] = rep.ok
    out.clauses["row negation"] = table_negation_failures() == []
    t6, t7 = lot_table(a_series(6)), lot_table(a_series(7))
    out.clauses["LOT 5/2 and -17/4"] = t7.get((6, 0)) == Fraction(5, 2) and t7.get((1, 0)) == Fraction(-17, 4)
    out.clauses["LOT up-triangles"] = not up_triangle_failures(t6, 6) and not up_triangle_failures(t7, 7)
    out.notes.append(f"{checked} reachable classes checked for k<=8")
    return out


@lru_cache(maxsize=None)
def criterion_10() -> Outcome:
    out = Outcome(10, "TL relations in the spin chain")
    for L in (6, 8):
        rep = relations_check(ChainParams(L, Fraction(3, 2)))
        out.clauses[f"untwisted L={L}"] = rep.ok and rep.checks.get("loop", False)
    for twist in (Twist.diagonal(Fraction(2)), Twist.diagonal(Fraction(-5, 7))):
        p = ChainParams(6, Fraction(3, 2), twist)
        out.clauses[f"diag {twist.entries[0]} relations"] = relations_check(p).ok
        out.clauses[f"diag {twist.entries[0]} spin form"] = tl_hamiltonian(p).equals(xxz_hamiltonian(p))
    out.notes.append("exact; E rho E = 2E at L=6,8")
    return out


@lru_cache(maxsize=None)
def criterion_11() -> Outcome:
    out = Outcome(11, "transfer matrix numerics")
    worst_c = worst_d = 0.0
    for L in (6, 7, 8):
        rep = logderiv_check(ChainParams(L, UNIT_Q))
        worst_c, worst_d = max(worst_c, rep.commutator), max(worst_d, rep.logderiv_error)
        out.clauses[f"L={L}"] = rep.ok
    worst_s = 0.0
    for k in range(1, 5):
        L = 2 * k + 2
        p = ChainParams(L, UNIT_Q)
        basis = transfer_terms_numeric(k, p) + [np.eye(1 << L)]
        res = span_residual(charge_matrix(k, p).to_array(), basis)
        worst_s = max(worst_s, res)
        out.clauses[f"span k={k}"] = res < 1e-8
    out.notes.append(f"[T,T'] {worst_c:.1e}, log-derivative {worst_d:.1e}, span residual {worst_s:.1e}")
    return out


@lru_cache(maxsize=None)
def criterion_12() -> Outcome:
    out = Outcome(12, "mutual commutativity")
    p = ChainParams(10, UNIT_Q)
    qs = {k: charge_matrix(k, p) for k in range(1, 5)}
    worst = 0.0
    for j in qs:
        for k in qs:
            if j < k:
                worst = max(worst, commutator_norm(qs[j], qs[k]) / (qs[j].norm() * qs[k].norm()))
    out.clauses["j,k<=4, L=10"] = worst < 1e-10
    out.notes.append(f"worst relative {worst:.1e}")
    return out


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


# ---- pytest ----------------------------------------------------------------

@pytest.mark.parametrize("number", [1, 2, 4, 6, 7, 8, 9, 10, 11, 12])
def test_criterion(number, capsys):
    out = CRITERIA[number - 1]()
    announce(out, capsys)
    assert out.ok, out.line()


def test_criterion_3_true_twists(capsys):
    out = criterion_3()
    announce(out, capsys)
    assert out.clauses["exact, twist none"] and out.clauses["exact, twist diag 2"]
    assert out.clauses["float L=12"]


@pytest.mark.xfail(strict=True, reason="a non-diagonal twist breaks e_L e_1 e_L = e_L; see the decision ledger")
def test_criterion_3_general_twist():
    assert criterion_3().clauses["exact, twist general SL(2)"]


def test_criterion_5_length_count(capsys):
    out = criterion_5()
    announce(out, capsys)
    assert out.clauses["2^(k-1) words of length k"]


@pytest.mark.xfail(strict=True, reason="Q_5 already has 32 nonzero classes; see the decision ledger")
def test_criterion_5_total_count():
    assert criterion_5().clauses["fewer than 2^k words in total"]


if __name__ == "__main__":
    results = []
    for fn in CRITERIA:
        out = fn()
        announce(out)
        results.append(out.ok)
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
