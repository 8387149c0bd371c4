import random
from fractions import Fraction
from itertools import product
from math import isqrt

import pytest

from conftest import random_element, random_ok_element, random_tp_integer
from mqf.errors import WrongDegreeError
from mqf.fields import make_field
from mqf.integers import (
    biquadratic_basis,
    hnf_rows,
    integral_residue_table,
    is_algebraic_integer,
    superset_lattice_box,
    totally_positive_integers_up_to_trace,
    trace_simplex_box,
)


# ---------------------------------------------------------------------------
# integrality
# ---------------------------------------------------------------------------

def test_integrality_examples(q32, q2):
    assert is_algebraic_integer(q32.element({2: Fraction(1, 2), 3: Fraction(1, 2)}))
    assert not is_algebraic_integer(q2.element({0: Fraction(1, 2), 1: Fraction(1, 2)}))
    f = make_field([5, 13])
    prod = ((f.one() + f.sqrt_term(5)) / 2) * ((f.one() + f.sqrt_term(13)) / 2)
    assert is_algebraic_integer(prod)


def test_integrality_via_char_poly_oracle(q23, q5):
    # the fast paths must agree with the definition: integer char poly
    rng = random.Random(31)
    for field in (q23, q5):
        for _ in range(150):
            x = random_element(field, rng, spread=5, denominators=(1, 2, 3, 4))
            expected = all(c.denominator == 1 for c in x.char_poly())
            assert is_algebraic_integer(x) == expected


def test_quadratic_textbook_rule():
    # D = 1 mod 4 admits half-integers (a and b both odd); otherwise only Z[sqrt(D)].
    for D in (2, 3, 5, 13, 6):
        field = make_field([D])
        for a in range(-20, 21):
            for b in range(-20, 21):
                x = field.element({0: Fraction(a, 2), 1: Fraction(b, 2)})
                both_even = a % 2 == 0 and b % 2 == 0
                both_odd = a % 2 == 1 and b % 2 == 1
                rule = both_even or (D % 4 == 1 and both_odd)
                assert is_algebraic_integer(x) == rule, (D, a, b)


def test_zero_and_rationals(q235):
    assert is_algebraic_integer(q235.zero())
    assert is_algebraic_integer(q235.rational(7))
    assert not is_algebraic_integer(q235.rational(Fraction(7, 3)))


def test_residue_table_matches_oracle(q23):
    table = integral_residue_table(q23)
    assert table.shape == (256,)
    scale = 4
    for idx in range(256):
        rem = idx
        coords = []
        for _ in range(4):
            coords.append(rem % scale)
            rem //= scale
        x = q23.from_scaled(coords, scale)
        assert bool(table[idx]) == all(c.denominator == 1 for c in x.char_poly())


# ---------------------------------------------------------------------------
# biquadratic integral bases
# ---------------------------------------------------------------------------

def test_basis_table_case_3_mod_4(q32):
    basis = biquadratic_basis(q32).basis
    expect = [
        q32.one(),
        q32.sqrt_term(3),
        q32.sqrt_term(2),
        (q32.sqrt_term(2) + q32.sqrt_term(6)) / 2,
    ]
    assert list(basis) == expect


def test_basis_table_case_1_mod_4():
    f = make_field([5, 13])
    half5 = (f.one() + f.sqrt_term(5)) / 2
    half13 = (f.one() + f.sqrt_term(13)) / 2
    assert list(biquadratic_basis(f).basis) == [f.one(), half5, half13, half5 * half13]


def test_basis_fallback_is_saturated():
    # p=5, q=2 is in neither table class: the verified search must return a
    # basis of maximal index among integral lattices in the (1/4)-grid.
    f = make_field([5, 2])
    basis = biquadratic_basis(f)
    lattice = [row for row in _scaled_rows(f, basis.basis)]
    for combo in product(range(4), repeat=4):
        if not any(combo):
            continue
        x = f.from_scaled(list(combo), 4)
        if is_algebraic_integer(x):
            assert _in_lattice(lattice, list(combo)), combo


def _scaled_rows(field, elements):
    rows = []
    for e in elements:
        den, coords = e.scaled_coords()
        rows.append([c * (4 // den) for c in coords])
    return hnf_rows(rows)


def _in_lattice(hnf, vec):
    v = list(vec)
    for row in hnf:
        pc = next(i for i, x in enumerate(row) if x)
        if v[pc] % row[pc] != 0:
            return False
        q = v[pc] // row[pc]
        v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


@pytest.mark.parametrize("primes", [[2, 3], [5, 13], [5, 2], [6, 10], [3, 7], [13, 17], [2, 7]])
def test_basis_elements_and_products_integral(primes):
    f = make_field(primes)
    basis = biquadratic_basis(f).basis
    assert len(basis) == 4
    for e in basis:
        assert is_algebraic_integer(e)
    for a in basis:
        for b in basis:
            assert is_algebraic_integer(a * b)
    # change of basis from the sqrt(p_I) basis is invertible
    rows = _scaled_rows(f, basis)
    det = 1
    for i, row in enumerate(rows):
        det *= row[i]
    assert det != 0


def test_basis_requires_k2(q2):
    with pytest.raises(WrongDegreeError):
        biquadratic_basis(q2)


def test_hnf_canonical():
    rows = [[4, 0, 0, 0], [0, 4, 0, 0], [0, 0, 4, 0], [0, 0, 0, 4], [1, 1, 1, 1]]
    out = hnf_rows(rows)
    assert out == [[1, 1, 1, 1], [0, 4, 0, 0], [0, 0, 4, 0], [0, 0, 0, 4]]
    # invariance under generator order and redundancy
    assert hnf_rows(rows[::-1] + [[2, 2, 2, 2]]) == out


# ---------------------------------------------------------------------------
# superset lattice boxes
# ---------------------------------------------------------------------------

def test_box_example_k1(q2):
    box = superset_lattice_box(q2, [3, 3])
    assert box.denominator == 2
    assert box.bounds == (Fraction(3), Fraction(2))
    # exhaustive: every integer a + b sqrt(2) with both embeddings in [-3, 3]
    # satisfies |a| <= 3, |b| <= 2  (grid here is (1/2)Z, integers are in Z)
    for a in range(-10, 11):
        for b in range(-10, 11):
            if abs(a + b * 2 ** 0.5) <= 3 and abs(a - b * 2 ** 0.5) <= 3:
                assert abs(a) <= 3 and abs(b) <= 2


def test_box_zero_bounds(q23):
    box = superset_lattice_box(q23, [0, 0, 0, 0])
    assert box.scaled_bounds == (0, 0, 0, 0)
    assert box.total_points() == 1  # only the origin


def test_box_example_k2(q23):
    box = superset_lattice_box(q23, [10] * 4)
    # largest multiple of 1/4 with B * sqrt(6) <= 10 is 4
    assert box.bounds[3] == 4
    # brute-force soundness on Z[sqrt2, sqrt3] points
    import itertools
    mat = q23.embedding_matrix()
    for coords in itertools.product(range(-12, 13), repeat=2):
        x = q23.element({0: coords[0], 3: coords[1]})
        vals = x.embedding_floats()
        if max(abs(v) for v in vals) <= 9.99:
            assert abs(coords[0]) <= box.bounds[0]
            assert abs(coords[1]) <= box.bounds[3]


def test_box_soundness_random_integers(q23):
    f513 = make_field([5, 13])
    rng = random.Random(33)
    for field in (q23, f513):
        for _ in range(500):
            x = random_ok_element(field, rng, spread=5)
            uppers = [max(abs(lo), abs(hi)) for lo, hi in x.embedding_enclosures()]
            box = superset_lattice_box(field, uppers)
            den, coords = x.scaled_coords()
            step = box.denominator // den
            for mask, n in enumerate(coords):
                assert abs(n * step) <= box.scaled_bounds[mask], (repr(x), mask)


def test_box_rejects_negative_bounds(q2):
    with pytest.raises(ValueError):
        superset_lattice_box(q2, [-1, 1])


def test_trace_simplex_box_contains_tp_integers(q23):
    rng = random.Random(34)
    for _ in range(300):
        x = random_tp_integer(q23, rng, spread=4, use_basis=True)
        t = x.trace()
        assert t.denominator == 1
        box = trace_simplex_box(q23, int(t))
        den, coords = x.scaled_coords()
        step = box.denominator // den
        for mask, n in enumerate(coords):
            assert abs(n * step) <= box.scaled_bounds[mask]


def test_totally_positive_enumeration_small(q2):
    got = totally_positive_integers_up_to_trace(q2, 6)
    names = sorted(repr(x) for x in got)
    # traces 2, 4, 6: rationals 1, 2, 3 and the conjugate pairs around them
    assert "1" in names and "2" in names and "3" in names
    assert "2 + s2" in names and "2 - s2" in names
    for x in got:
        assert x.is_totally_positive()
        assert is_algebraic_integer(x)
        assert x.trace() <= 6
    # completeness cross-check by brute force over integer coordinates
    count = 0
    for a in range(1, 4):
        for b in range(-3, 4):
            x = q2.element({0: a, 1: b})
            if x.is_totally_positive():
                count += 1
    assert count == len(got)
