from hypothesis import settings, strategies as st

from tlcharges.poly import TauPoly
from tlcharges.words import TL1Word

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def tl1_words(draw, max_width: int = 10, normalized: bool = False):
    width = draw(st.integers(1, max_width))
    inner = draw(st.sets(st.integers(1, width - 2), max_size=max(width - 2, 0))) if width > 2 else set()
    support = tuple(sorted({0, width - 1} | inner))
    pairs = TL1Word(support).pairs()
    flags = draw(st.sets(st.sampled_from(pairs))) if pairs else set()
    word = TL1Word(support, frozenset(flags))
    if normalized:
        return word
    return word.translate(draw(st.integers(-20, 20)))


fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def tau_polys(draw, max_degree: int = 5):
    coeffs = draw(st.lists(fractions, max_size=max_degree + 1))
    return TauPoly(coeffs)

