"""Independent constructions of conserved densities, used to cross-check the closed form.

* transfer series: b-derivatives of log prod_j (1 + b e_j)
* symmetrized series A_k built from it
* boost series, nested commutators with B = sum_j j e_j
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import sympy

from .charges import ChargeDensity, build_charge
from .diagram import Diagram, LinComb, diagram_to_word, generator_diagram, normalize_translation
from .poly import ONE, ZERO, TauPoly
from .words import time_reverse


class WindowTooSmall(ValueError):
    pass


class NoSolution(ArithmeticError):
    pass


class BulkInconsistency(AssertionError):
    """Equal translation classes carried different coefficients in the bulk."""


class BSeries:
    """Truncated power series in b with LinComb coefficients."""

    def __init__(self, order: int, coeffs: list[LinComb] | None = None):
        self.order = order
        self.coeffs = coeffs if coeffs is not None else [LinComb() for _ in range(order + 1)]

    @classmethod
    def product(cls, sites: range, order: int) -> "BSeries":
        """prod_j (1 + b e_j) with j increasing from left to right."""
        out = cls(order)
        out.coeffs[0] = LinComb.of(Diagram(0, ()), ONE)
        for j in sites:
            # right-multiplying by (1 + b e_j) appends e_j as the first-acting factor
            e = LinComb.of(generator_diagram(j), ONE)
            for m in range(min(order, j - sites.start + 1), 0, -1):
                out.coeffs[m] = out.coeffs[m] + out.coeffs[m - 1] * e
        return out

    def log_coefficient(self, power: int) -> LinComb:
        """[b^power] of log(1 + X), X = self - 1, as a noncommutative series."""
        xs = self.coeffs
        # layer[p] = [b^p] X^n, built for n = 1, 2, ...
        layer = {p: xs[p] for p in range(1, power + 1) if xs[p]}
        total = LinComb()
        n = 1
        while layer:
            if power in layer:
                total = total + layer[power].scale(Fraction((-1) ** (n + 1), n))
            nxt = {}
            for m in range(1, power + 1):
                if not xs[m]:
                    continue
                for p, term in layer.items():
                    if p + m <= power:
                        prod = xs[m] * term
                        nxt[p + m] = nxt[p + m] + prod if (p + m) in nxt else prod
            layer = {p: v for p, v in nxt.items() if v}
            n += 1
        return total


def _normalized_sum(lc: LinComb) -> dict[Diagram, TauPoly]:
    out: dict[Diagram, TauPoly] = {}
    for d, c in lc.items():
        key = normalize_translation(d)[0]
        s = out.get(key, ZERO) + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


def _to_density(k: int, terms: dict[Diagram, TauPoly], label: str) -> ChargeDensity:
    words = {}
    for d, c in terms.items():
        p = diagram_to_word(d)
        if p is None:
            raise BulkInconsistency(f"{label}_{k}: reduced word outside TL1 in the bulk")
        words[p] = c
    return ChargeDensity(k, words, label=label)


def extract_bulk(lc: LinComb, lo: int, hi: int, k: int, label: str) -> ChargeDensity:
    """Density of classes seen entirely inside generators [lo, hi).

    Every admissible placement of a class must carry the same coefficient.
    """
    seen: dict[Diagram, dict[int, TauPoly]] = {}
    for d, c in lc.items():
        if d.lo >= lo and d.hi - 2 < hi:
            key, shift = normalize_translation(d)
            seen.setdefault(key, {})[-shift] = c
    terms = {}
    for key, where in seen.items():
        width = key.n - 1
        spots = range(lo, hi - width + 1)
        values = {where.get(x, ZERO) for x in spots}
        if len(values) != 1:
            raise BulkInconsistency(f"{label}_{k}: coefficient varies across the bulk")
        terms[key] = values.pop()
    return _to_density(k, {d: c for d, c in terms.items() if c}, label)


@lru_cache(maxsize=None)
def _log_window(k: int, m: int) -> dict[Diagram, TauPoly]:
    """k! [b^k] log prod_{j<m} (1 + b e_j), summed per translation class."""
    series = BSeries.product(range(m), k)
    lc = series.log_coefficient(k).scale(math.factorial(k))
    return _normalized_sum(lc)


def transfer_term(k: int, window: int | None = None) -> ChargeDensity:
    """Bulk density of the k-th b-derivative of log prod_j (1 + b e_j).

    Default: connected-cluster evaluation.  Terms of the logarithm whose
    generators split into mutually commuting blocks cancel, so only contiguous
    runs of at most k generators survive and the bulk density telescopes to
    Phi_k - Phi_{k-1}, with Phi_m the class sums on a window of m generators.
    With ``window`` given, the product is taken over [0, window) directly and
    the classes inside [k, window - k) are read off.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if window is None:
        big = _log_window(k, k)
        small = _log_window(k, k - 1) if k > 1 else {}
        terms = dict(big)
        for d, c in small.items():
            s = terms.get(d, ZERO) - c
            if s:
                terms[d] = s
            else:
                terms.pop(d, None)
        return _to_density(k, terms, "T")
    if window < 3 * k + 2:
        raise WindowTooSmall(f"window {window} < 3k+2 = {3 * k + 2}")
    series = BSeries.product(range(window), k)
    lc = series.log_coefficient(k).scale(math.factorial(k))
    return extract_bulk(lc, k, window - k, k, "T")


def transfer_series(k: int, window: int | None = None) -> list[ChargeDensity]:
    return [transfer_term(m, window) for m in range(1, k + 1)]


def _odd_powers(limit: int) -> list[int]:
    return list(range(1, limit + 1, 2))


@lru_cache(maxsize=None)
def a_coefficients(k: int) -> tuple[TauPoly, ...]:
    """The a_{k,i} making A_k (anti)symmetric under time reversal.

    Each a_{k,i} is sought as an odd polynomial in tau of degree <= 2i-1,
    the shape that keeps tau-degree plus word length at parity k.
    """
    series = {m: transfer_term(m) for m in range(1, k + 1)}
    lead = series[k].scale(Fraction(1, math.factorial(k - 1)))
    sign = 1 if k % 2 else -1
    unknowns = [(i, j) for i in range(1, k // 2 + 1) for j in _odd_powers(2 * i - 1)]
    syms = sympy.symbols(f"a0:{len(unknowns)}")
    words = set(lead.terms)
    for m in series.values():
        words |= set(m.terms)
    eqs = []
    for p in words:
        # coefficient of p minus sign * coefficient of its time reverse
        r = time_reverse(p)
        expr: dict[int, sympy.Expr] = {}

        def acc(poly: TauPoly, weight):
            for c, power in poly.terms():
                expr[power] = expr.get(power, 0) + weight * sympy.Rational(c.numerator, c.denominator)

        acc(lead[p], 1)
        acc(lead[r], -sign)
        for s, (i, j) in zip(syms, unknowns):
            base = series[k + 1 - 2 * i]
            acc(base[p].shift(j), s)
            acc(base[r].shift(j), -sign * s)
        eqs.extend(e for e in expr.values() if e != 0)
    if not unknowns:
        if eqs:
            raise NoSolution(f"A_{k}: leading term not (anti)symmetric")
        return ()
    sol = sympy.solve(eqs, syms, dict=True)
    if not sol:
        raise NoSolution(f"A_{k}: symmetry system inconsistent")
    sol = sol[0]
    free = [s for s in syms if s not in sol]
    if free:
        raise NoSolution(f"A_{k}: symmetry system underdetermined in {free}")
    out = []
    for i in range(1, k // 2 + 1):
        terms = []
        for s, (ii, j) in zip(syms, unknowns):
            if ii == i:
                v = sympy.Rational(sol[s])
                terms.append((Fraction(int(v.p), int(v.q)), j))
        out.append(TauPoly.from_terms(terms))
    return tuple(out)


def a_series(k: int) -> ChargeDensity:
    """A_k = T_k/(k-1)! + sum_i a_{k,i} T_{k+1-2i}."""
    out = transfer_term(k).scale(Fraction(1, math.factorial(k - 1)))
    for i, a in enumerate(a_coefficients(k), 1):
        out = out + transfer_term(k + 1 - 2 * i).scale(a)
    return ChargeDensity(k, out.terms, label="A")


def boost_series(k: int, window: int | None = None) -> list[ChargeDensity]:
    """G_1 .. G_k on the open window [0, M).

    G_1 = sum_j e_j and G_{n+1} = [G_n, B]; this sign convention is the one
    that reproduces the tabulated G columns for both parities of n.
    """
    window = 4 * k if window is None else window
    if window < 4 * k:
        raise WindowTooSmall(f"window {window} < 4k = {4 * k}")
    return list(_boost(k, window))


@lru_cache(maxsize=None)
def _boost(k: int, window: int) -> tuple[ChargeDensity, ...]:
    sites = range(window)
    boost = LinComb()
    for j in sites:
        boost.add_term(generator_diagram(j), TauPoly.const(j))
    g = LinComb()
    for j in sites:
        g.add_term(generator_diagram(j), ONE)
    out = [extract_bulk(g, k, window - k, 1, "G")]
    for n in range(2, k + 1):
        g = g * boost - boost * g
        out.append(extract_bulk(g, k, window - k, n, "G"))
    return tuple(out)


def charge_decomposition(density: ChargeDensity, tau_coefficients: bool = False) -> dict[int, TauPoly]:
    """Write a density as sum_j c_j Q_{k-j} over even j, solved exactly.

    With ``tau_coefficients`` false each c_j is a rational times tau^j; with it
    true c_j may be any polynomial of degree <= j and parity j.  Raises
    NoSolution when the density is outside the span.
    """
    k = density.k
    unknowns = [(j, i) for j in range(0, k, 2) for i in range(j % 2, j + 1, 2)
                if tau_coefficients or i == j]
    syms = sympy.symbols(f"c0:{len(unknowns)}")
    rows: dict[tuple, sympy.Expr] = {}

    def acc(key, value):
        rows[key] = rows.get(key, 0) + value

    for p, c in density.items():
        for x, power in c.terms():
            acc((p, power), -sympy.Rational(x.numerator, x.denominator))
    for s, (j, i) in zip(syms, unknowns):
        for p, c in build_charge(k - j).items():
            for x, power in c.terms():
                acc((p, power + i), s * sympy.Rational(x.numerator, x.denominator))
    eqs = [e for e in rows.values() if e != 0]
    sol = sympy.solve(eqs, syms, dict=True)
    if not sol:
        raise NoSolution(f"{density.label}_{k} is not a combination of the Q_(k-j)")
    terms: dict[int, list] = {}
    for s, (j, i) in zip(syms, unknowns):
        v = sympy.Rational(sol[0].get(s, 0))
        terms.setdefault(j, []).append((Fraction(int(v.p), int(v.q)), i))
    return {j: TauPoly.from_terms(t) for j, t in terms.items()}
