"""Local conserved charges of the periodic XXZ chain written in the Temperley-Lieb algebra."""

from .charges import ChargeDensity, build_charge, c_connected, c_general, coefficient, delta, z_value
from .diagram import Diagram, LinComb, compose, embed_word, generator_diagram
from .poly import TAU, TauPoly
from .words import TL1Word, canonical_tl1, classify_environments, enumerate_candidates, params, word

__all__ = [
    "ChargeDensity", "build_charge", "c_connected", "c_general", "coefficient", "delta", "z_value",
    "Diagram", "LinComb", "compose", "embed_word", "generator_diagram",
    "TAU", "TauPoly",
    "TL1Word", "canonical_tl1", "classify_environments", "enumerate_candidates", "params", "word",
]
