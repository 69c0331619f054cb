"""Closed-form coefficients of the local charges and their densities."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from .poly import ONE, TAU, ZERO, TauPoly
from .words import TL1Word, enumerate_candidates, params

ZFunc = Callable[[int, int, int], Fraction]


def binom_gen(n: int, m: int) -> int:
    """Falling-factorial binomial, defined for negative ``n`` too."""
    if m < 0:
        return 0
    num, den = 1, 1
    for i in range(m):
        num *= n - i
        den *= i + 1
    return num // den


@lru_cache(maxsize=None)
def z_value(k: int, w: int, t: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    if w > k:
        return 0
    sign = -1 if t % 2 else 1
    up, down = (k + 1) // 2, k // 2
    return sign * (binom_gen(up - t - 1, k - w) + binom_gen(down - t - 1, k - w))


def triangle_check(k: int, max_w: int | None = None, z: ZFunc = z_value) -> bool:
    """Up-triangles of the Z table sum to zero, and the row w = k+1 vanishes."""
    max_w = k + 1 if max_w is None else max_w
    for w in range(2, max_w + 1):
        for t in range(1, w):
            if z(k, w, t - 1) + z(k, w, t) + z(k, w + 1, t):
                return False
    return all(z(k, k + 1, t) == 0 for t in range(k + 2))


def c_connected(k: int, w: int, t: int, z: ZFunc = z_value) -> TauPoly:
    if w < 1:
        raise ValueError("width must be >= 1")
    if w > k:
        return ZERO
    out = [Fraction(0)] * (k - w + 1)
    for j in range((k - w) // 2 + 1):
        out[k - w - 2 * j] = Fraction(z(k, w + 2 * j, t + j))
    return TauPoly(out)


def c_general(k: int, w: int, t: int, v: int, g: int, z: ZFunc = z_value) -> TauPoly:
    """Coefficient as a function of the four word parameters."""
    body = c_connected(k, w + v + g, t + v + g, z) if w + v + g >= 1 else ZERO
    return body * (-TAU) ** g if g else body


def coefficient(k: int, word: TL1Word, z: ZFunc = z_value) -> TauPoly:
    w, t, v, g = params(word)
    return c_general(k, w, t, v, g, z)


def delta(k: int, w: int, t: int, z: ZFunc = z_value) -> TauPoly:
    return c_connected(k, w, t - 1, z) + c_connected(k, w, t, z) + TAU * c_connected(k, w + 1, t, z)


class ChargeDensity:
    """Translation-class density: normalized TL1 word -> coefficient."""

    def __init__(self, k: int, terms: Mapping[TL1Word, TauPoly] | Iterable[tuple[TL1Word, TauPoly]] = (),
                 label: str = "Q"):
        self.k = k
        self.label = label
        self.terms: dict[TL1Word, TauPoly] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for p, c in items:
            p = p.normalized()
            s = self.terms.get(p, ZERO) + c
            if s:
                self.terms[p] = s
            else:
                self.terms.pop(p, None)

    def __getitem__(self, p: TL1Word) -> TauPoly:
        return self.terms.get(p.normalized(), ZERO)

    def __contains__(self, p: TL1Word) -> bool:
        return p.normalized() in self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[TL1Word]:
        return iter(self.sorted_words())

    def items(self):
        return [(p, self.terms[p]) for p in self.sorted_words()]

    def sorted_words(self) -> list[TL1Word]:
        return sorted(self.terms, key=TL1Word.sort_key)

    def scale(self, c) -> "ChargeDensity":
        return ChargeDensity(self.k, {p: x * c for p, x in self.terms.items()}, self.label)

    def __add__(self, other: "ChargeDensity") -> "ChargeDensity":
        return ChargeDensity(self.k, list(self.terms.items()) + list(other.terms.items()), self.label)

    def __sub__(self, other: "ChargeDensity") -> "ChargeDensity":
        return self + other.scale(-1)

    def __eq__(self, other):
        return isinstance(other, ChargeDensity) and self.terms == other.terms

    def __repr__(self):
        return f"ChargeDensity({self.label}_{self.k}, {len(self)} words)"


def build_charge(k: int, z: ZFunc = z_value) -> ChargeDensity:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        # defined as -H; the closed form would give twice this
        return ChargeDensity(1, {TL1Word((0,)): ONE})
    terms = {}
    for p in enumerate_candidates(k):
        c = coefficient(k, p, z)
        if c:
            terms[p] = c
    return ChargeDensity(k, terms)


def triangle_solution(k: int, seeds: Mapping[int, Fraction] | None = None) -> ZFunc:
    """A Z table solving the triangle relations, built row by row downward.

    Row w = k+1 is zero; each lower row w is fixed by its first entry
    ``seeds[w]`` (default: the closed form's value).
    """
    table: dict[tuple[int, int], Fraction] = {}
    for w in range(k, 0, -1):
        first = Fraction(seeds[w]) if seeds and w in seeds else Fraction(z_value(k, w, 0))
        table[w, 0] = first
        for t in range(1, w):
            above = table.get((w + 1, t), Fraction(0))
            table[w, t] = -above - table[w, t - 1]

    def z(kk: int, w: int, t: int) -> Fraction:
        if kk != k:
            return Fraction(z_value(kk, w, t))
        if w > k:
            return Fraction(0)
        return table.get((w, t), Fraction(0))

    return z

