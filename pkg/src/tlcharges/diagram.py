"""Open-chain Temperley-Lieb diagrams and their linear combinations.

A diagram lives on a window of strands [lo, hi).  With n = hi - lo, boundary
point p < n is the bottom end of strand lo + p and point n + p its top end;
``link[p]`` is the point joined to p.  Strands outside the window are straight.
Generator e_i acts on strands i and i+1.  Stacking ``a`` on top of ``b`` is the
operator product a*b (b acts first).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .poly import ONE, ZERO, TauPoly
from .words import GeneralWord, TL1Word, all_tl1_words


@dataclass(frozen=True, order=True)
class Diagram:
    lo: int
    link: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.link) // 2

    @property
    def hi(self) -> int:
        return self.lo + self.n

    @property
    def is_identity(self) -> bool:
        return not self.link

    def translate(self, d: int) -> "Diagram":
        return Diagram(self.lo + d, self.link) if self.link else self

    def through_strands(self) -> int:
        n = self.n
        return sum(1 for p in range(n) if self.link[p] >= n)

    def is_planar(self) -> bool:
        """Check the pairing is non-crossing by walking the boundary circle."""
        n = self.n
        # boundary order: bottom left-to-right, then top right-to-left
        order = list(range(n)) + [n + p for p in reversed(range(n))]
        rank = {pt: r for r, pt in enumerate(order)}
        stack = []
        for pt in order:
            mate = self.link[pt]
            if rank[mate] > rank[pt]:
                stack.append(pt)
            elif not stack or stack.pop() != mate:
                return False
        return not stack


IDENTITY = Diagram(0, ())


@lru_cache(maxsize=None)
def generator_diagram(i: int) -> Diagram:
    # window [i, i+2): bottom 0-1 cup, top 2-3 cap
    return Diagram(i, (1, 0, 3, 2))


def _widen(d: Diagram, lo: int, hi: int) -> tuple[int, ...]:
    n = hi - lo
    if d.is_identity:
        return tuple(list(range(n, 2 * n)) + list(range(n)))
    m, off = d.n, d.lo - lo
    link = [0] * (2 * n)
    for p in range(n):
        link[p] = n + p
        link[n + p] = p
    for p in range(2 * m):
        q = d.link[p]
        src = (p + off) if p < m else (n + p - m + off)
        dst = (q + off) if q < m else (n + q - m + off)
        link[src] = dst
    return tuple(link)


def _trim(lo: int, link: list[int]) -> Diagram:
    n = len(link) // 2
    a, b = 0, n
    while a < b and link[a] == n + a:
        a += 1
    while b > a and link[b - 1] == n + b - 1:
        b -= 1
    if a == b:
        return IDENTITY
    if a == 0 and b == n:
        return Diagram(lo, tuple(link))
    m = b - a
    out = [0] * (2 * m)
    for p in range(a, b):
        for src, dst in ((p, link[p]), (n + p, link[n + p])):
            s = src - a if src < n else m + src - n - a
            t = dst - a if dst < n else m + dst - n - a
            out[s] = t
    return Diagram(lo + a, tuple(out))


def compose(a: Diagram, b: Diagram) -> tuple[Diagram, int]:
    """Stack ``a`` on top of ``b``; return the reduced diagram and loop count."""
    if a.is_identity:
        return b, 0
    if b.is_identity:
        return a, 0
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    n = hi - lo
    A = a.link if (a.lo == lo and a.hi == hi) else _widen(a, lo, hi)
    B = b.link if (b.lo == lo and b.hi == hi) else _widen(b, lo, hi)
    out = [-1] * (2 * n)
    seen = [False] * n  # middle row points
    for start in range(2 * n):
        if out[start] >= 0:
            continue
        # enter B from its bottom, or A from its top
        in_b, pos = (True, start) if start < n else (False, start)
        while True:
            if in_b:
                x = B[pos]
                if x < n:
                    end = x
                    break
                seen[x - n] = True
                in_b, pos = False, x - n
            else:
                y = A[pos]
                if y >= n:
                    end = y
                    break
                seen[y] = True
                in_b, pos = True, n + y
        out[start] = end
        out[end] = start
    loops = 0
    for m in range(n):
        if seen[m]:
            continue
        loops += 1
        cur = m
        while True:
            seen[cur] = True
            nxt = A[cur]  # stays in the middle row for an unvisited point
            seen[nxt] = True
            cur = B[n + nxt] - n
            if cur == m:
                break
    return _trim(lo, out), loops


def normalize_translation(d: Diagram) -> tuple[Diagram, int]:
    if d.is_identity:
        raise ValueError("no-canonical-shift: identity diagram")
    return Diagram(0, d.link), -d.lo


class LinComb:
    """Finite combination Diagram -> TauPoly with zero terms dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Diagram, TauPoly] | Iterable[tuple[Diagram, TauPoly]] = ()):
        self.terms: dict[Diagram, TauPoly] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for d, c in items:
            self.add_term(d, c)

    @classmethod
    def of(cls, d: Diagram, c: TauPoly | int = 1) -> "LinComb":
        return cls([(d, TauPoly.const(c) if isinstance(c, int) else c)])

    def add_term(self, d: Diagram, c: TauPoly) -> None:
        if not c:
            return
        prev = self.terms.get(d)
        if prev is None:
            self.terms[d] = c
        else:
            s = prev + c
            if s:
                self.terms[d] = s
            else:
                del self.terms[d]

    def __iter__(self) -> Iterator[Diagram]:
        return iter(self.terms)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __getitem__(self, d: Diagram) -> TauPoly:
        return self.terms.get(d, ZERO)

    def __eq__(self, other):
        return isinstance(other, LinComb) and self.terms == other.terms

    def __add__(self, other: "LinComb") -> "LinComb":
        out = self.copy()
        for d, c in other.items():
            out.add_term(d, c)
        return out

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other: "LinComb") -> "LinComb":
        return mul(self, other)

    def copy(self) -> "LinComb":
        out = LinComb()
        out.terms = dict(self.terms)
        return out

    def scale(self, c: TauPoly | int) -> "LinComb":
        out = LinComb()
        for d, x in self.items():
            out.add_term(d, x * c)
        return out

    def translate(self, s: int) -> "LinComb":
        out = LinComb()
        out.terms = {d.translate(s): c for d, c in self.items()}
        return out

    def __repr__(self):
        return f"LinComb({len(self)} terms)"


def mul(a: LinComb, b: LinComb) -> LinComb:
    out = LinComb()
    for da, ca in a.items():
        for db, cb in b.items():
            d, loops = compose(da, db)
            out.add_term(d, (ca * cb).shift(loops))
    return out


def add(a: LinComb, b: LinComb) -> LinComb:
    return a + b


def scale(a: LinComb, c: TauPoly | int) -> LinComb:
    return a.scale(c)


def word_diagram(letters: Iterable[int]) -> tuple[Diagram, int]:
    """Reduce a product of generators (leftmost acts last) to (diagram, loops)."""
    d, loops = IDENTITY, 0
    for i in letters:
        d, extra = compose(d, generator_diagram(i))
        loops += extra
    return d, loops


def embed_word(word: GeneralWord | TL1Word) -> LinComb:
    letters = word.letters() if isinstance(word, TL1Word) else word.letters
    d, loops = word_diagram(letters)
    return LinComb.of(d, ONE.shift(loops))


def tl1_diagram(word: TL1Word) -> Diagram:
    d, loops = word_diagram(word.letters())
    assert loops == 0
    return d


@lru_cache(maxsize=None)
def _word_index(max_width: int) -> dict[Diagram, TL1Word]:
    return {tl1_diagram(p): p for p in all_tl1_words(max_width)}


def diagram_to_word(d: Diagram) -> TL1Word | None:
    """The normalized TL1 word whose diagram is ``d`` (normalized), or None."""
    if d.is_identity:
        return None
    # a TL1 word on generators 0..w-1 occupies strands 0..w
    width = d.n - 1
    return _word_index(max(width, 1)).get(d) if d.lo == 0 else None
