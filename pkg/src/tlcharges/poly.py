"""Exact polynomials in the loop weight tau with rational coefficients."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[int, Fraction]

_TERM = re.compile(r"([+-]?)([^+-]+)")


class TauPoly:
    """Immutable polynomial in tau, stored densely by ascending power.

    Trailing zeros are trimmed on construction, so the zero polynomial is the
    empty tuple and equality is plain tuple equality.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = None

    @classmethod
    def monomial(cls, coeff: Scalar, power: int) -> "TauPoly":
        if power < 0:
            raise ValueError("negative tau power")
        return cls([0] * power + [coeff])

    @classmethod
    def const(cls, c: Scalar) -> "TauPoly":
        return cls([c])

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Scalar, int]]) -> "TauPoly":
        acc: dict[int, Fraction] = {}
        for c, p in terms:
            acc[p] = acc.get(p, Fraction(0)) + Fraction(c)
        if not acc:
            return ZERO
        return cls([acc.get(i, 0) for i in range(max(acc) + 1)])

    @classmethod
    def parse(cls, text: str) -> "TauPoly":
        """Parse the fixture grammar, e.g. ``2-2*tau^2`` or ``-tau/2+3``."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty polynomial")
        if s in ("0", "+0", "-0"):
            return ZERO
        pos = 0
        terms = []
        for m in _TERM.finditer(s):
            if m.start() != pos:
                raise ValueError(f"cannot parse {text!r} at {pos}")
            pos = m.end()
            sign, body = m.groups()
            c, power = _parse_monomial(body, text)
            terms.append((-c if sign == "-" else c, power))
        if pos != len(s):
            raise ValueError(f"cannot parse {text!r} at {pos}")
        return cls.from_terms(terms)

    # arithmetic

    def __add__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return TauPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return TauPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            return TauPoly([c * other for c in self.coeffs])
        if not isinstance(other, TauPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return ZERO
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return TauPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "TauPoly":
        return self * (1 / Fraction(other))

    def __pow__(self, n: int) -> "TauPoly":
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def shift(self, n: int) -> "TauPoly":
        """Multiply by tau**n."""
        if n == 0 or not self.coeffs:
            return self
        return TauPoly([0] * n + list(self.coeffs))

    # queries

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, power: int) -> Fraction:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def terms(self) -> list[tuple[Fraction, int]]:
        return [(c, i) for i, c in enumerate(self.coeffs) if c]

    def __call__(self, x):
        """Evaluate by Horner; exact for int/Fraction x, floating otherwise."""
        exact = isinstance(x, (int, Fraction))
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if exact else float(c))
        return acc

    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coeffs)) if self.coeffs else 1

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for c, p in self.terms():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if p == 0:
                body = str(mag)
            else:
                var = "tau" if p == 1 else f"tau^{p}"
                if mag == 1:
                    body = var
                elif mag.denominator == 1:
                    body = f"{mag}*{var}"
                else:
                    num = "" if mag.numerator == 1 else f"{mag.numerator}*"
                    body = f"{num}{var}/{mag.denominator}"
            parts.append((sign, body))
        text = "".join(s + b for s, b in parts)
        return text[1:] if text.startswith("+") else text

    def __repr__(self):
        return f"TauPoly({str(self)!r})"


def _lift(x):
    if isinstance(x, TauPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return TauPoly([x])
    return NotImplemented


def _parse_monomial(body: str, text: str) -> tuple[Fraction, int]:
    num = Fraction(1)
    power = 0
    den = 1
    if "/" in body:
        body, d = body.rsplit("/", 1)
        den = int(d)
    for factor in body.split("*"):
        if factor.startswith("tau"):
            rest = factor[3:]
            if rest == "":
                power += 1
            elif rest.startswith("^"):
                power += int(rest[1:])
            else:
                raise ValueError(f"bad factor {factor!r} in {text!r}")
        else:
            num *= Fraction(factor)
    return num / den, power


ZERO = TauPoly()
ONE = TauPoly([1])
TAU = TauPoly([0, 1])
