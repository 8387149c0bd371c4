import random
from fractions import Fraction

import pytest

from mqf.fields import make_field
from mqf.integers import biquadratic_basis


@pytest.fixture(scope="session")
def q2():
    return make_field([2])


@pytest.fixture(scope="session")
def q5():
    return make_field([5])


@pytest.fixture(scope="session")
def q23():
    return make_field([2, 3])


@pytest.fixture(scope="session")
def q32():
    return make_field([3, 2])


@pytest.fixture(scope="session")
def q235():
    return make_field([2, 3, 5])


def random_element(field, rng: random.Random, spread: int = 9, max_terms: int | None = None,
                   denominators=(1, 1, 2, 4)):
    """Sparse random element with small exact coefficients."""
    masks = list(range(field.degree))
    if max_terms is not None and max_terms < field.degree:
        masks = rng.sample(masks, max_terms)
    coeffs = {}
    for m in masks:
        num = rng.randint(-spread, spread)
        if num:
            coeffs[m] = Fraction(num, rng.choice(denominators))
    return field.element(coeffs)


def random_integer_element(field, rng: random.Random, spread: int = 6):
    """Random element of Z[sqrt(p_I)] (always an algebraic integer)."""
    return field.element({m: rng.randint(-spread, spread) for m in range(field.degree)})


_BASIS_CACHE = {}


def random_ok_element(field, rng: random.Random, spread: int = 4):
    """Random element of O_K via integral-basis combinations (k = 2 only)."""
    basis = _BASIS_CACHE.get(field.primes)
    if basis is None:
        basis = biquadratic_basis(field).basis
        _BASIS_CACHE[field.primes] = basis
    out = field.zero()
    for b in basis:
        out = out + rng.randint(-spread, spread) * b
    return out


def shift_totally_positive(x):
    """Smallest integer shift t making x + t totally positive (exact)."""
    lo_min = min(lo for lo, _ in x.embedding_enclosures())
    t = 1
    if lo_min < 0:
        t += -lo_min.numerator // lo_min.denominator  # ceil(-lo_min)
    y = x + t
    assert y.is_totally_positive()
    return y


def random_tp_integer(field, rng: random.Random, spread: int = 6, use_basis: bool = False):
    """Random totally positive algebraic integer, via an exact positive shift."""
    if use_basis and field.k == 2:
        x = random_ok_element(field, rng, spread)
    else:
        x = random_integer_element(field, rng, spread)
    return shift_totally_positive(x)
