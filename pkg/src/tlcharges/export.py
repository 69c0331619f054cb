"""JSON, CSV and TeX emitters for charge densities.

Rows come out in canonical order: by word length, then by the displayed
letter sequence.
"""

from __future__ import annotations

import csv
import io
import json
import re
from fractions import Fraction

from .charges import ChargeDensity
from .poly import TauPoly
from .words import canonical_tl1, params

FORMATS = ("json", "csv", "tex")


def coeff_pairs(c: TauPoly) -> list[list]:
    return [[str(x), p] for x, p in c.terms()]


def to_records(density: ChargeDensity) -> list[dict]:
    out = []
    for p, c in density.items():
        w, t, v, g = params(p)
        out.append({"word": list(p.letters()), "w": w, "t": t, "v": v, "g": g,
                    "coeff": coeff_pairs(c)})
    return out


def to_json(density: ChargeDensity, indent: int | None = None) -> str:
    return json.dumps({"k": density.k, "terms": to_records(density)}, indent=indent)


def from_json(text: str) -> ChargeDensity:
    data = json.loads(text)
    terms = {}
    for row in data["terms"]:
        c = TauPoly.from_terms((Fraction(x), int(p)) for x, p in row["coeff"])
        terms[canonical_tl1(row["word"])] = c
    return ChargeDensity(int(data["k"]), terms)


def to_csv(density: ChargeDensity) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["word", "w", "t", "v", "g", "coeff"])
    for p, c in density.items():
        out.writerow([str(p), *params(p), str(c)])
    return buf.getvalue()


def _tex_poly(c: TauPoly) -> str:
    text = str(c).replace("*", "")
    text = re.sub(r"tau\^(\d+)", r"\\tau^{\1}", text)
    return re.sub(r"tau(?!\^)", r"\\tau", text)


def to_tex(density: ChargeDensity) -> str:
    lines = [r"\begin{tabular}{ll}", r"\hline",
             f"word & ${density.label}_{{{density.k}}}$ \\\\", r"\hline"]
    for p, c in density.items():
        lines.append(f"{p} & ${_tex_poly(c)}$ \\\\")
    lines += [r"\hline", r"\end{tabular}", ""]
    return "\n".join(lines)


def render(density: ChargeDensity, fmt: str) -> str:
    if fmt == "json":
        return to_json(density) + "\n"
    if fmt == "csv":
        return to_csv(density)
    if fmt == "tex":
        return to_tex(density)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
