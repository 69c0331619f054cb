"""Golden word tables (Q, A, G series for k = 2..7) shipped as TSV files."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .charges import ChargeDensity
from .poly import ZERO, TauPoly
from .words import TL1Word, canonical_tl1, parse_notation

SERIES = ("Q", "A", "G")
KS = range(2, 8)
_HEADER = re.compile(r"#\s*series=(\w)\s+k=(\d+)\s+normalization=(\S+)")


class FixtureError(ValueError):
    pass


@dataclass
class Fixture:
    series: str
    k: int
    normalization: Fraction
    rows: list[tuple[str, TauPoly]] = field(default_factory=list)

    @property
    def name(self) -> str:
        return f"{self.series}{self.k}"

    def density(self) -> ChargeDensity:
        """The tabulated values, with the normalization divided back out."""
        terms = {}
        for text, c in self.rows:
            p = canonical_tl1(parse_notation(text))
            if p in terms:
                raise FixtureError(f"{self.name}: duplicate word {text}")
            terms[p] = c / self.normalization
        return ChargeDensity(self.k, terms, label=self.series)


def parse_fixture(text: str, source: str = "<fixture>") -> Fixture:
    fx = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m:
                fx = Fixture(m.group(1), int(m.group(2)), Fraction(m.group(3)))
            continue
        if fx is None:
            raise FixtureError(f"{source}:{lineno}: row before header")
        try:
            word_text, poly_text = line.split("\t")
            canonical_tl1(parse_notation(word_text))
            fx.rows.append((word_text, TauPoly.parse(poly_text)))
        except ValueError as exc:
            raise FixtureError(f"{source}:{lineno}: {exc}") from exc
    if fx is None:
        raise FixtureError(f"{source}: missing header")
    return fx


def load_fixture(series: str, k: int) -> Fixture:
    path = resources.files("tlcharges") / "fixtures" / f"{series}{k}.tsv"
    return parse_fixture(path.read_text(encoding="utf-8"), str(path))


def load_fixtures() -> dict[tuple[str, int], Fixture]:
    return {(s, k): load_fixture(s, k) for s in SERIES for k in KS}


@dataclass
class DiffReport:
    name: str
    missing: list[str] = field(default_factory=list)
    extra: list[str] = field(default_factory=list)
    mismatched: list[tuple[str, TauPoly, TauPoly]] = field(default_factory=list)
    untabulated: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing or self.extra or self.mismatched)

    def as_dict(self) -> dict:
        return {
            "fixture": self.name,
            "ok": self.ok,
            "missing": self.missing,
            "extra": self.extra,
            "untabulated": self.untabulated,
            "mismatched": [
                {"word": w, "expected": str(e), "computed": str(c), "delta": str(c - e)}
                for w, e, c in self.mismatched
            ],
        }


def diff(fixture: Fixture, computed: ChargeDensity) -> DiffReport:
    """Compare after scaling ``computed`` by the fixture normalization.

    The tables carry no single-generator rows; such computed terms (a multiple
    of the Hamiltonian, present for odd k) are reported as untabulated rather
    than as extra.
    """
    report = DiffReport(fixture.name)
    expected = {canonical_tl1(parse_notation(t)): c for t, c in fixture.rows}
    scaled = computed.scale(fixture.normalization)
    for p, e in expected.items():
        c = scaled[p]
        if c != e:
            if not c:
                report.missing.append(str(p))
            else:
                report.mismatched.append((str(p), e, c))
    for p, c in scaled.items():
        if p not in expected and c != ZERO:
            (report.untabulated if len(p) == 1 else report.extra).append(str(p))
    return report


def fixture_word(text: str) -> TL1Word:
    return canonical_tl1(parse_notation(text))
