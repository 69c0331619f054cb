"""Words in the TL generators: canonical single-occurrence form and its parameters.

Notation: ``[i_m ... i_1]`` denotes the operator product e_{i_m} ... e_{i_1}, so the
last index is applied first.  A pair of neighbouring generators (e_i, e_{i+1}) is
*transposed* when e_{i+1} is applied after e_i.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence


class NotTL1Error(ValueError):
    """Raised when a word uses some generator more than once."""


@dataclass(frozen=True)
class GeneralWord:
    """Operator product of generators; ``letters[-1]`` acts first."""

    letters: tuple[int, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return notation(self.letters)


def from_sequence(indices: Iterable[int]) -> GeneralWord:
    return GeneralWord(tuple(int(i) for i in indices))


class WordParams(NamedTuple):
    w: int
    t: int
    v: int
    g: int


@dataclass(frozen=True, order=True)
class TL1Word:
    """A word with every generator at most once.

    ``support`` is sorted; ``transposed`` holds each i whose pair (i, i+1) is
    transposed.  Together they fix the word up to commuting letters.
    """

    support: tuple[int, ...]
    transposed: frozenset[int] = frozenset()

    def __post_init__(self):
        if not self.support:
            raise ValueError("TL1 word needs a nonempty support")
        if tuple(sorted(set(self.support))) != self.support:
            raise ValueError(f"support must be sorted and distinct: {self.support}")
        members = set(self.support)
        for i in self.transposed:
            if i not in members or i + 1 not in members:
                raise ValueError(f"flag on pair ({i},{i + 1}) outside support")

    @property
    def params(self) -> WordParams:
        return params(self)

    def __len__(self):
        return len(self.support)

    @property
    def lo(self) -> int:
        return self.support[0]

    @property
    def hi(self) -> int:
        return self.support[-1]

    def pairs(self) -> list[int]:
        """Left index of every adjacent pair inside the support."""
        members = set(self.support)
        return [i for i in self.support if i + 1 in members]

    def translate(self, d: int) -> "TL1Word":
        return TL1Word(tuple(i + d for i in self.support), frozenset(i + d for i in self.transposed))

    def normalized(self) -> "TL1Word":
        return self.translate(-self.lo)

    def letters(self) -> tuple[int, ...]:
        """Display order: smallest index first whenever non-commutation allows."""
        members = set(self.support)
        # edge u -> v means u must be written left of v
        succ: dict[int, list[int]] = {i: [] for i in self.support}
        indeg = dict.fromkeys(self.support, 0)
        for i in self.support:
            if i + 1 in members:
                a, b = (i + 1, i) if i in self.transposed else (i, i + 1)
                succ[a].append(b)
                indeg[b] += 1
        ready = [i for i in self.support if indeg[i] == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            i = heapq.heappop(ready)
            out.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        return tuple(out)

    def as_general(self) -> GeneralWord:
        return GeneralWord(self.letters())

    def sort_key(self):
        return (len(self.support), self.letters())

    def __str__(self):
        return notation(self.letters())


def notation(letters: Sequence[int]) -> str:
    return "[" + " ".join(str(i) for i in letters) + "]"


def parse_notation(text: str) -> GeneralWord:
    """Read ``[2 1 0 3]``; compact ``[210345]`` is accepted for single digits."""
    inner = text.strip()
    if not (inner.startswith("[") and inner.endswith("]")):
        raise ValueError(f"word notation must be bracketed: {text!r}")
    inner = inner[1:-1].strip()
    if not inner:
        return GeneralWord()
    if re.fullmatch(r"\d+", inner):
        return from_sequence(int(c) for c in inner)
    parts = re.split(r"[\s,]+", inner)
    return from_sequence(int(p) for p in parts)


def canonical_tl1(word: GeneralWord | Sequence[int]) -> TL1Word:
    letters = word.letters if isinstance(word, GeneralWord) else tuple(word)
    if not letters:
        raise NotTL1Error("the empty word is not in TL1")
    position = {}
    for pos, i in enumerate(letters):
        if i in position:
            raise NotTL1Error(f"generator e_{i} repeats in {notation(letters)}")
        position[i] = pos
    # e_{i+1} applied after e_i  <=>  e_{i+1} written to the left of e_i
    flags = frozenset(i for i in position if i + 1 in position and position[i + 1] < position[i])
    return TL1Word(tuple(sorted(position)), flags)


def word(text: str) -> TL1Word:
    """Shorthand: canonical TL1 word from bracket notation."""
    return canonical_tl1(parse_notation(text))


def params(word: TL1Word) -> WordParams:
    s = word.support
    w = s[-1] - s[0] + 1
    v = w - len(s)
    g = sum(1 for a, b in zip(s, s[1:]) if b - a > 1)
    return WordParams(w, len(word.transposed), v, g)


def reflect(word: TL1Word, pivot: int) -> TL1Word:
    """Spatial mirror i -> pivot - i; every mirrored pair flips its flag."""
    support = tuple(sorted(pivot - i for i in word.support))
    members = set(support)
    flags = frozenset(
        j for j in support if j + 1 in members and (pivot - 1 - j) not in word.transposed
    )
    return TL1Word(support, flags)


def time_reverse(word: TL1Word) -> TL1Word:
    flags = frozenset(i for i in word.pairs() if i not in word.transposed)
    return TL1Word(word.support, flags)


def mirror(word: TL1Word) -> TL1Word:
    """Reflection about the word's own extent, so the support stays put."""
    return reflect(word, word.lo + word.hi)


def enumerate_candidates(k: int) -> list[TL1Word]:
    """One representative (min support 0) per class with w + v + g <= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = []
    for p in all_tl1_words(k):
        w, _, v, g = params(p)
        if w + v + g <= k:
            out.append(p)
    out.sort(key=TL1Word.sort_key)
    return out


def all_tl1_words(max_width: int) -> Iterator[TL1Word]:
    """Every normalized TL1 word of width <= max_width (no coefficient cut)."""
    for width in range(1, max_width + 1):
        inner = range(1, width - 1)
        for r in range(len(inner) + 1):
            for kept in itertools.combinations(inner, r):
                support = (0, *kept, width - 1) if width > 1 else (0,)
                pairs = TL1Word(support).pairs()
                for bits in itertools.product((False, True), repeat=len(pairs)):
                    yield TL1Word(support, frozenset(p for p, b in zip(pairs, bits) if b))


class EnvCode(enum.Enum):
    PL1 = "PL1"
    PR1 = "PR1"
    PL2 = "PL2"
    PR2 = "PR2"
    PL3 = "PL3"
    PR3 = "PR3"
    PP = "PP"
    FR1 = "FR1"
    FL1 = "FL1"
    FR2 = "FR2"
    FL2 = "FL2"
    FR3 = "FR3"
    FL3 = "FL3"
    FF = "FF"
    L1R1 = "L1R1"
    L1R2 = "L1R2"
    L1R3 = "L1R3"
    L2R1 = "L2R1"
    L2R2 = "L2R2"
    L2R3 = "L2R3"
    L3R1 = "L3R1"
    L3R2 = "L3R2"
    L3R3 = "L3R3"


def _vacancy_suffix(members: set[int], i: int, step: int, end: int) -> int:
    if i == end:
        return 3
    return 1 if (i + 2 * step) in members else 2


def classify_environments(word: TL1Word) -> list[tuple[int, EnvCode]]:
    """Environment code for every initial or final generator of the word."""
    members = set(word.support)
    out = []
    for i in word.support:
        if i - 1 in members:
            # pair (i-1, i) transposed: e_i applied after its left neighbour
            left = "F" if (i - 1) in word.transposed else "P"
        else:
            left = f"L{_vacancy_suffix(members, i, -1, word.lo)}"
        if i + 1 in members:
            right = "P" if i in word.transposed else "F"
        else:
            right = f"R{_vacancy_suffix(members, i, 1, word.hi)}"
        if left in "PF" and right in "PF":
            if left != right:
                continue
            code = left + right
        elif left in "PF":
            code = left + right
        elif right in "PF":
            code = right + left
        else:
            code = left + right
        out.append((i, EnvCode(code)))
    return out
