import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from circle_euler.exact import GaussianRational
from circle_euler.spectral import EXACT, SpectralFunction

small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def real_exact_functions(draw, max_mode=3):
    """Random real-valued exact trigonometric polynomials."""
    N = draw(st.integers(0, max_mode))
    coeffs = {0: GaussianRational(draw(small_fracs))}
    for n in range(1, N + 1):
        c = GaussianRational(draw(small_fracs), draw(small_fracs))
        coeffs[n] = c
        coeffs[-n] = c.conjugate()
    return SpectralFunction(coeffs, N, EXACT)


def random_exact(rng: random.Random, N: int, den: int = 7) -> SpectralFunction:
    def q():
        return Fraction(rng.randint(-9, 9), rng.randint(1, den))

    coeffs = {0: GaussianRational(q())}
    for n in range(1, N + 1):
        c = GaussianRational(q(), q())
        coeffs[n] = c
        coeffs[-n] = c.conjugate()
    return SpectralFunction(coeffs, N, EXACT)


def random_double(rng: np.random.Generator, N: int) -> SpectralFunction:
    c = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
    c[0] = c[0].real
    coeffs = {0: c[0]}
    for n in range(1, N + 1):
        coeffs[n] = c[n]
        coeffs[-n] = np.conj(c[n])
    return SpectralFunction(coeffs, N)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def pyrng():
    return random.Random(1234)
