"""Symbolic checks that the closed-form charges commute with the Hamiltonian.

Two independent routes to the coefficient S_k(p) of a word p in
[Q_k, sum_j e_j] are provided: a direct one that multiplies candidate words q
by a generator and compares diagrams, and one that sums per-generator
contributions read off from the environment of each generator in p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Mapping, NamedTuple, Sequence

from .charges import ChargeDensity, ZFunc, build_charge, c_general, z_value
from .diagram import Diagram, compose, diagram_to_word, generator_diagram, normalize_translation, tl1_diagram, word_diagram
from .poly import ZERO, TauPoly
from .words import (
    EnvCode,
    GeneralWord,
    NotTL1Error,
    TL1Word,
    WordParams,
    all_tl1_words,
    canonical_tl1,
    classify_environments,
    params,
)


class Row(NamedTuple):
    """sign * tau^power * C_k(w+dw, t+dt, v+dv, g+dg)"""

    sign: int
    power: int
    dw: int
    dt: int
    dv: int
    dg: int


def _rows(*specs: tuple[int, ...]) -> tuple[Row, ...]:
    return tuple(Row(*s) for s in specs)


# A generator that precedes at least one neighbour.
PRECEDING: dict[str, tuple[Row, ...]] = {
    "PL1": _rows((1, 0, 0, 1, -1, -1), (1, 0, 0, 2, -1, -1), (1, 1, 0, 0, 0, 0), (1, 0, 0, -1, 1, 0)),
    "PR1": _rows((1, 0, 0, 0, -1, -1), (1, 0, 0, 1, -1, -1), (1, 1, 0, 0, 0, 0), (1, 0, 0, 0, 1, 0)),
    "PL2": _rows((1, 0, 0, 1, -1, 0), (1, 1, 0, 0, 0, 0), (1, 0, 0, -1, 1, 0)),
    "PR2": _rows((1, 0, 0, 0, -1, 0), (1, 1, 0, 0, 0, 0), (1, 0, 0, 0, 1, 0)),
    "PL3": _rows((1, 0, 1, 1, 0, 0), (1, 1, 0, 0, 0, 0), (1, 0, -1, -1, 0, 0)),
    "PR3": _rows((1, 0, 1, 0, 0, 0), (1, 1, 0, 0, 0, 0), (1, 0, -1, 0, 0, 0)),
    "PP": _rows((1, 1, 0, 0, 0, 0), (1, 0, 0, -1, 1, 1)),
}

# A generator that follows one or both neighbours.
FOLLOWING: dict[str, tuple[Row, ...]] = {
    "FR1": _rows((-1, 0, 0, 1, -1, -1), (-1, 0, 0, 2, -1, -1), (-1, 1, 0, 0, 0, 0), (-1, 0, 0, -1, 1, 0)),
    "FL1": _rows((-1, 0, 0, 0, -1, -1), (-1, 0, 0, 1, -1, -1), (-1, 1, 0, 0, 0, 0), (-1, 0, 0, 0, 1, 0)),
    "FR2": _rows((-1, 0, 0, 1, -1, 0), (-1, 1, 0, 0, 0, 0), (-1, 0, 0, -1, 1, 0)),
    "FL2": _rows((-1, 0, 0, 0, -1, 0), (-1, 1, 0, 0, 0, 0), (-1, 0, 0, 0, 1, 0)),
    "FR3": _rows((-1, 0, 1, 1, 0, 0), (-1, 1, 0, 0, 0, 0), (-1, 0, -1, -1, 0, 0)),
    "FL3": _rows((-1, 0, 1, 0, 0, 0), (-1, 1, 0, 0, 0, 0), (-1, 0, -1, 0, 0, 0)),
    "FF": _rows((-1, 1, 0, 0, 0, 0), (-1, 0, 0, -1, 1, 1)),
}

# Isolated generator: one half-code per side, combined as LiRj.
ISOLATED: dict[str, tuple[Row, ...]] = {
    "L1": _rows((-1, 0, 0, 0, -1, -1), (-1, 0, 0, 1, -1, -1), (1, 0, 0, 1, -1, -1), (1, 0, 0, 2, -1, -1)),
    "L2": _rows((-1, 0, 0, 0, -1, 0), (1, 0, 0, 1, -1, 0)),
    "L3": _rows((-1, 0, 1, 0, 0, 0), (1, 0, 1, 1, 0, 0)),
    "R1": _rows((1, 0, 0, 0, -1, -1), (1, 0, 0, 1, -1, -1), (-1, 0, 0, 1, -1, -1), (-1, 0, 0, 2, -1, -1)),
    "R2": _rows((1, 0, 0, 0, -1, 0), (-1, 0, 0, 1, -1, 0)),
    "R3": _rows((1, 0, 1, 0, 0, 0), (-1, 0, 1, 1, 0, 0)),
}


def mirror_code(code: str) -> str:
    """Left-right reflection of a code: P<->F and L<->R."""
    swap = {"P": "F", "F": "P", "L": "R", "R": "L"}
    out = "".join(swap.get(c, c) for c in code)
    if code.startswith(("L", "R")) and len(code) == 4:
        # LiRj reflects to LjRi
        return f"L{code[3]}R{code[1]}"
    return out


def code_rows(code: EnvCode | str) -> tuple[Row, ...]:
    name = code.value if isinstance(code, EnvCode) else code
    if name in PRECEDING:
        return PRECEDING[name]
    if name in FOLLOWING:
        return FOLLOWING[name]
    if len(name) == 4 and name[0] == "L" and name[2] == "R":
        return ISOLATED[name[:2]] + ISOLATED[name[2:]]
    raise KeyError(f"unknown environment code {name!r}")


class UndefinedContribution(ValueError):
    """A row points at a word with a negative vacancy or gap count."""


def contribution(code: EnvCode | str, k: int, wp: WordParams | tuple[int, int, int, int],
                 z: ZFunc = z_value) -> TauPoly:
    w, t, v, g = wp
    total = ZERO
    for r in code_rows(code):
        vv, gg = v + r.dv, g + r.dg
        if vv < 0 or gg < 0:
            raise UndefinedContribution(f"{code} at {tuple(wp)}")
        c = c_general(k, w + r.dw, t + r.dt, vv, gg, z)
        if c:
            total = total + c.shift(r.power) * r.sign
    return total


def table_negation_failures() -> list[str]:
    """Rows of the following-table that are not the negated mirrored preceding rows."""
    bad = []
    for code, rows in PRECEDING.items():
        mirrored = FOLLOWING[mirror_code(code)]
        expected = tuple(r._replace(sign=-r.sign) for r in rows)
        if mirrored != expected:
            bad.append(code)
    for side in "123":
        left, right = ISOLATED["L" + side], ISOLATED["R" + side]
        if sorted(r._replace(sign=-r.sign) for r in left) != sorted(right):
            bad.append("L" + side)
    return bad


# ---- commutator density ---------------------------------------------------

@dataclass
class CommutatorDensity:
    k: int
    terms: dict[Diagram, TauPoly] = field(default_factory=dict)
    # every normalized diagram produced by some product, with a reduced word for it
    reachable: dict[Diagram, TL1Word | GeneralWord] = field(default_factory=dict)

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def word_terms(self) -> list[tuple[str, TauPoly]]:
        return sorted((str(self.reachable[d]), c) for d, c in self.terms.items())


def _reduced_word(q: TL1Word, sigma: int, on_right: bool, d: Diagram, loops: int) -> TL1Word | GeneralWord:
    if loops:
        return q
    if sigma not in q.support:
        return TL1Word(tuple(sorted((*q.support, sigma))), _flags_after_adding(q, sigma, on_right))
    found = diagram_to_word(Diagram(0, d.link)) if not d.is_identity else None
    if found is not None:
        return found.translate(d.lo)
    letters = q.letters() + (sigma,) if on_right else (sigma,) + q.letters()
    return GeneralWord(letters)


def _flags_after_adding(q: TL1Word, sigma: int, on_right: bool) -> frozenset[int]:
    letters = q.letters() + (sigma,) if on_right else (sigma,) + q.letters()
    return canonical_tl1(letters).transposed


def _charge_lookup(k: int, z: ZFunc, density: ChargeDensity | None) -> ChargeDensity:
    return density if density is not None else build_charge(k, z)


def commutator_density(k: int, z: ZFunc = z_value, density: ChargeDensity | None = None) -> CommutatorDensity:
    """sum_q sum_d D(q) (q e_d - e_d q), accumulated per translation class.

    Offsets d outside [min(q) - 1, max(q) + 1] commute with q and are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    charge = _charge_lookup(k, z, density)
    out = CommutatorDensity(k)
    for q, c in charge.items():
        dq = tl1_diagram(q)
        for sigma in range(q.lo - 1, q.hi + 2):
            e = generator_diagram(sigma)
            for sign, on_right, (d, loops) in ((1, True, compose(dq, e)), (-1, False, compose(e, dq))):
                key, shift = normalize_translation(d)
                if key not in out.reachable:
                    out.reachable[key] = _translate_word(_reduced_word(q, sigma, on_right, d, loops), shift)
                s = out.terms.get(key, ZERO) + c.shift(loops) * sign
                if s:
                    out.terms[key] = s
                else:
                    out.terms.pop(key, None)
    return out


def _translate_word(p: TL1Word | GeneralWord, shift: int) -> TL1Word | GeneralWord:
    if isinstance(p, TL1Word):
        return p.translate(shift)
    return GeneralWord(tuple(i + shift for i in p.letters))


# ---- direct evaluation of S_k(p) -----------------------------------------

def _as_reduced(p: TL1Word | GeneralWord | Sequence[int]) -> tuple[TL1Word | GeneralWord, Diagram]:
    if isinstance(p, TL1Word):
        return p, tl1_diagram(p)
    letters = p.letters if isinstance(p, GeneralWord) else tuple(p)
    try:
        tl1 = canonical_tl1(letters)
        return tl1, tl1_diagram(tl1)
    except NotTL1Error:
        pass
    d, loops = word_diagram(letters)
    if loops or d.is_identity:
        raise ValueError(f"word {GeneralWord(letters)} is not reduced")
    key, shift = normalize_translation(d)
    found = diagram_to_word(key)
    if found is not None:
        return found.translate(-shift), d
    return GeneralWord(letters), d


def _order_flags(letters: Sequence[int]) -> dict[int, bool]:
    """Transposition flag for each adjacent pair whose letters occur once."""
    counts: dict[int, int] = {}
    pos: dict[int, int] = {}
    for n, i in enumerate(letters):
        counts[i] = counts.get(i, 0) + 1
        pos[i] = n
    return {i: pos[i + 1] < pos[i] for i in pos
            if i + 1 in pos and counts[i] == 1 and counts[i + 1] == 1}


def s_direct(k: int, p: TL1Word | GeneralWord | Sequence[int], z: ZFunc = z_value,
             density: ChargeDensity | None = None) -> TauPoly:
    """S_k(p) = sum_{p = q e_s} D(q) - sum_{p = e_s q} D(q), by forward products.

    Multiplying q by e_s changes q only on s-1, s, s+1, so each candidate q
    agrees with p away from that window: same support, same pair order.
    Candidates are generated from that, multiplied out, and matched against
    p's diagram.
    """
    word, target = _as_reduced(p)
    letters = word.letters() if isinstance(word, TL1Word) else word.letters
    counts: dict[int, int] = {}
    for i in letters:
        counts[i] = counts.get(i, 0) + 1
    support = sorted(counts)
    flags = _order_flags(letters)
    doubled = {i for i, n in counts.items() if n > 1}
    total = ZERO
    for sigma in range(support[0] - 1, support[-1] + 2):
        if doubled - {sigma} or counts.get(sigma, 0) > 2:
            continue
        window = {sigma - 1, sigma, sigma + 1}
        outside = [i for i in support if i not in window]
        e = generator_diagram(sigma)
        for r in range(4):
            for added in combinations(sorted(window), r):
                q_support = tuple(sorted((*outside, *added)))
                if not q_support:
                    continue
                members = set(q_support)
                fixed, free = set(), []
                for i in q_support:
                    if i + 1 not in members:
                        continue
                    if i in window or i + 1 in window:
                        free.append(i)
                    elif flags[i]:
                        fixed.add(i)
                for bits in product((False, True), repeat=len(free)):
                    q = TL1Word(q_support, frozenset(fixed | {i for i, b in zip(free, bits) if b}))
                    c = density[q] if density is not None else _coefficient(k, q, z)
                    if not c:
                        continue
                    dq = tl1_diagram(q)
                    d, loops = compose(dq, e)
                    if d == target:
                        total = total + c.shift(loops)
                    d, loops = compose(e, dq)
                    if d == target:
                        total = total - c.shift(loops)
    return total


def _coefficient(k: int, q: TL1Word, z: ZFunc) -> TauPoly:
    if k == 1:
        return build_charge(1)[q]
    w, t, v, g = params(q)
    return c_general(k, w, t, v, g, z)


def s_env(k: int, p: TL1Word, z: ZFunc = z_value) -> TauPoly:
    """S_k(p) as the sum of tabulated contributions of p's initial and final generators."""
    if not isinstance(p, TL1Word):
        raise TypeError("environment contributions are defined for single-occurrence words")
    wp = params(p)
    total = ZERO
    for _, code in classify_environments(p):
        total = total + contribution(code, k, wp, z)
    return total


@dataclass
class ReachableReport:
    k: int
    checked: int = 0
    tl1_words: int = 0
    nonzero: list[str] = field(default_factory=list)
    disagreements: list[tuple[str, str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.nonzero and not self.disagreements


def check_reachable(k: int, z: ZFunc = z_value, expect_zero: bool = True) -> ReachableReport:
    """Compare the commutator, s_direct and s_env on every reachable word."""
    comm = commutator_density(k, z)
    density = build_charge(k, z)
    report = ReachableReport(k)
    for key, p in comm.reachable.items():
        report.checked += 1
        brute = comm.terms.get(key, ZERO)
        direct = s_direct(k, p, z, density=density)
        if isinstance(p, TL1Word):
            report.tl1_words += 1
            env = s_env(k, p, z)
        else:
            env = ZERO  # a doubled generator: both sides cancel
        if not (brute == direct == env):
            report.disagreements.append((str(p), str(brute), str(direct), str(env)))
        if expect_zero and (brute or direct or env):
            report.nonzero.append(str(p))
    return report


# ---- pairing counts and the four-parameter structure -----------------------

def code_balance(p: TL1Word) -> dict[str, int]:
    """Net counts that must vanish for the contributions of p to telescope."""
    counts = {"P-F": 0, "L1-R1": 0, "L2-R2": 0, "L3": 0, "R3": 0}
    for _, code in classify_environments(p):
        name = code.value
        for ch in name[:2] if name in ("PP", "FF") else name[:1]:
            if ch == "P":
                counts["P-F"] += 1
            elif ch == "F":
                counts["P-F"] -= 1
        sides = [name[i:i + 2] for i in range(len(name) - 1) if name[i] in "LR"]
        for s in sides:
            if s[1] == "3":
                counts[s] += 1
            else:
                counts[f"L{s[1]}-R{s[1]}"] += 1 if s[0] == "L" else -1
    counts["L3"] -= 1
    counts["R3"] -= 1
    return counts


def parametric_value(code: EnvCode | str) -> tuple[int, int, int, int]:
    """Coefficients of (Phi, Lambda_1, Lambda_2, Lambda_3) in the four-parameter solution."""
    name = code.value if isinstance(code, EnvCode) else code
    vec = [0, 0, 0, 0]
    if name == "FF":
        vec[0] = 2
    elif name == "PP":
        vec[0] = -2
    elif name[0] in "PF" and len(name) == 3:
        lead, side, j = name[0], name[1], int(name[2])
        vec[0] = 1 if lead == "F" else -1
        vec[j] = 1 if side == "L" else -1
    else:
        vec[int(name[1])] += 1
        vec[int(name[3])] -= 1
    return tuple(vec)


def parametric_total(p: TL1Word) -> tuple[int, int, int, int]:
    total = [0, 0, 0, 0]
    for _, code in classify_environments(p):
        for n, x in enumerate(parametric_value(code)):
            total[n] += x
    return tuple(total)


# ---- the six identities ---------------------------------------------------

class Identity(NamedTuple):
    name: str
    codes: tuple[str, ...]
    in_range: Callable[[int, int], bool]  # (W, T) -> bool


IDENTITIES: tuple[Identity, ...] = (
    Identity("L3R1+L1R2+L2R3", ("L3R1", "L1R2", "L2R3"), lambda W, T: True),
    Identity("FL3+PR2+L2R3", ("FL3", "PR2", "L2R3"), lambda W, T: True),
    Identity("PL3+FR2+L2R3", ("PL3", "FR2", "L2R3"), lambda W, T: True),
    Identity("PL3+FR1+L1R3", ("PL3", "FR1", "L1R3"), lambda W, T: 0 < T - 1 < W - 2),
    Identity("PL3+FF+PR3", ("PL3", "FF", "PR3"), lambda W, T: 0 < T < W - 1),
    Identity("PL1+FF+PR1", ("PL1", "FF", "PR1"), lambda W, T: 1 < T < W - 2),
)

ALL_CODES = tuple(c.value for c in EnvCode)


def _split_isolated(code: str) -> tuple[str, str] | None:
    if len(code) == 4 and code[0] == "L":
        return code[:2], code[2:]
    return None


def relevant_tuples(k: int, codes: Sequence[str]) -> set[WordParams]:
    """Parameters of words of width <= k+2 that show every feature the codes need.

    Non-isolated codes must occur as such.  An isolated code LiRj only needs
    one isolated generator with Li on its left and one with Rj on its right,
    since the identities combine contributions from different generators.
    """
    out = set()
    for p in all_tl1_words(k + 2):
        present = {code.value for _, code in classify_environments(p)}
        halves = set()
        for name in present:
            split = _split_isolated(name)
            if split:
                halves.update(split)
        ok = True
        for code in codes:
            split = _split_isolated(code)
            if split:
                if not set(split) <= halves:
                    ok = False
                    break
            elif code not in present:
                ok = False
                break
        if ok:
            out.add(params(p))
    return out


@dataclass
class IdentityReport:
    k: int
    checked: dict[str, int] = field(default_factory=dict)
    out_of_range: dict[str, list[tuple[int, int, int, int]]] = field(default_factory=dict)
    violations: list[tuple[str, tuple[int, int, int, int], str]] = field(default_factory=list)
    solution_checked: int = 0
    solution_violations: list[tuple[str, tuple[int, int, int, int], str]] = field(default_factory=list)
    table_failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.violations or self.solution_violations or self.table_failures)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "ok": self.ok,
            "checked": self.checked,
            "out_of_range": {n: len(v) for n, v in self.out_of_range.items()},
            "violations": [{"identity": n, "params": list(t), "value": v} for n, t, v in self.violations],
            "solution_checked": self.solution_checked,
            "solution_violations": [
                {"code": n, "params": list(t), "value": v} for n, t, v in self.solution_violations
            ],
            "table_failures": self.table_failures,
        }


def _wt(wp) -> tuple[int, int]:
    w, t, v, g = wp
    return w + v + g, t + v + g


def check_identities(k: int, z: ZFunc = z_value) -> IdentityReport:
    if k < 2:
        raise ValueError("k must be >= 2")
    report = IdentityReport(k, table_failures=table_negation_failures())
    for ident in IDENTITIES:
        tuples = relevant_tuples(k, ident.codes)
        report.checked[ident.name] = 0
        report.out_of_range[ident.name] = []
        for wp in sorted(tuples):
            W, T = _wt(wp)
            if not ident.in_range(W, T):
                report.out_of_range[ident.name].append(tuple(wp))
                continue
            report.checked[ident.name] += 1
            value = sum((contribution(c, k, wp, z) for c in ident.codes), ZERO)
            if value:
                report.violations.append((ident.name, tuple(wp), str(value)))
    # the four-parameter form wherever every contribution is defined and
    # every identity is in range
    for wp in _solution_tuples(k):
        W, T = _wt(wp)
        if not all(ident.in_range(W, T) for ident in IDENTITIES):
            continue
        values = {c: contribution(c, k, wp, z) for c in ALL_CODES}
        phi = values["FF"] / 2
        lam = [None] + [values[f"FL{j}"] - phi for j in (1, 2, 3)]
        report.solution_checked += 1
        for code in ALL_CODES:
            a, l1, l2, l3 = parametric_value(code)
            expected = phi * a + lam[1] * l1 + lam[2] * l2 + lam[3] * l3
            if values[code] != expected:
                report.solution_violations.append((code, tuple(wp), str(values[code] - expected)))
    return report


def _solution_tuples(k: int) -> list[WordParams]:
    # every contribution is defined once the word has a gap
    out = {params(p) for p in all_tl1_words(k + 2)}
    return sorted(wp for wp in out if wp.v >= 1 and wp.g >= 1)


# ---- leading-order terms --------------------------------------------------

def lot_table(density: ChargeDensity) -> dict[tuple[int, int], Fraction]:
    """Coefficient of tau^(k-w) for connected words, keyed by (w, t)."""
    k = density.k
    out: dict[tuple[int, int], Fraction] = {}
    for p, c in density.items():
        w, t, v, _ = params(p)
        if v:
            continue
        value = c.coeff(k - w)
        if (w, t) in out and out[w, t] != value:
            raise ValueError(f"connected words with (w,t)=({w},{t}) disagree")
        out[w, t] = value
    return out


def up_triangle_failures(table: Mapping[tuple[int, int], Fraction], k: int) -> list[tuple[int, int]]:
    """(w, t) with 0 < t < w where Z(w,t-1) + Z(w,t) + Z(w+1,t) != 0."""
    bad = []
    for w in range(2, k + 1):
        for t in range(1, w):
            s = table.get((w, t - 1), 0) + table.get((w, t), 0) + table.get((w + 1, t), 0)
            if s:
                bad.append((w, t))
    return bad
