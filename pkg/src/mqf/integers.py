"""Algebraic-integer membership, integral bases, and the superset lattice.

The ring of integers O_K is only ever needed in two sound approximations:

* exact membership via the characteristic polynomial (``is_algebraic_integer``)
* an enclosing lattice (1/2^k) Z[sqrt(p_I)] with per-coordinate bounds
  (``superset_lattice_box``), which contains every algebraic integer whose
  embeddings are bounded, so enumerating it is exhaustive.

For biquadratic fields an explicit integral basis is produced, either from the
classified residue table or from a verified coset-saturation search.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .errors import WrongDegreeError
from .fields import FieldElement, MultiquadField, _mul_int_dicts
from .kernels import BoxScan, embedding_margin


def _int_conjugate(coeffs: dict[int, int], smask: int) -> dict[int, int]:
    return {m: (-c if (smask & m).bit_count() % 2 else c) for m, c in coeffs.items()}


def _scaled_char_poly(field: MultiquadField, coords: list[int]) -> list[int]:
    """Integer char-poly coefficients of the integer-coordinate element coords.

    Constant term first.  Raises if a symmetric function fails to be rational,
    which would indicate an arithmetic bug, not bad input.
    """
    base = {m: c for m, c in enumerate(coords) if c}
    poly: list[dict[int, int]] = [{0: 1}]
    for smask in range(field.degree):
        conj = _int_conjugate(base, smask)
        nxt: list[dict[int, int]] = [{} for _ in range(len(poly) + 1)]
        for deg, coeff in enumerate(poly):
            for m, c in coeff.items():
                nxt[deg + 1][m] = nxt[deg + 1].get(m, 0) + c
            for m, c in _mul_int_dicts(field, coeff, conj).items():
                nxt[deg][m] = nxt[deg].get(m, 0) - c
        poly = nxt
    out = []
    for coeff in poly:
        assert all(c == 0 for m, c in coeff.items() if m != 0), "non-rational symmetric function"
        out.append(coeff.get(0, 0))
    return out


def _charpoly_integral(field: MultiquadField, coords: list[int], den: int) -> bool:
    cpoly = _scaled_char_poly(field, coords)
    n = field.degree
    # char(x)(T) = char(den*x)(den*T) / den^n, so coefficient j must lose den^(n-j).
    return all(cpoly[j] % den ** (n - j) == 0 for j in range(n))


def integral_residue_table(field: MultiquadField) -> np.ndarray:
    """Boolean table over coordinate residues mod 2^k deciding integrality.

    Integrality of an element of the superset grid only depends on its
    coordinates modulo Z[sqrt(p_I)], so for k <= 2 a (2^k)^(2^k)-entry table
    answers membership in O(1).  Indexing: sum_I residue_I * (2^k)^I.
    """
    if field._residue_cache is None:
        scale = 1 << field.k
        size = scale ** field.degree
        if field.k > 2:
            raise ValueError("residue table only built for k <= 2")
        table = np.zeros(size, dtype=np.bool_)
        for idx in range(size):
            rem = idx
            coords = []
            for _ in range(field.degree):
                coords.append(rem % scale)
                rem //= scale
            g = 0
            for c in coords:
                g = gcd(g, c)
            den = scale // gcd(scale, g) if any(coords) else 1
            if den == 1:
                table[idx] = True
            else:
                reduced = [c // (scale // den) for c in coords]
                table[idx] = _charpoly_integral(field, reduced, den)
        field._residue_cache = table
    return field._residue_cache


def integral_mask(field: MultiquadField, coords: np.ndarray) -> np.ndarray:
    """Vectorized is_algebraic_integer over rows of 2^k-scaled coordinates."""
    if field.k <= 2:
        table = integral_residue_table(field)
        scale = 1 << field.k
        idx = np.zeros(len(coords), dtype=np.int64)
        power = 1
        for axis in range(field.degree):
            idx += (coords[:, axis] % scale) * power
            power *= scale
        return table[idx]
    return np.array(
        [is_algebraic_integer(field.from_scaled([int(v) for v in row], 1 << field.k))
         for row in coords],
        dtype=np.bool_,
    )


def is_algebraic_integer(x: FieldElement) -> bool:
    """True iff the characteristic polynomial of x has integer coefficients."""
    den, coords = x.scaled_coords()
    if den == 1:
        return True  # Z[sqrt(p_I)] consists of algebraic integers
    scale = 1 << x.field.k
    if scale % den != 0:
        # O_K lies inside (1/2^k) Z[sqrt(p_I)]; other denominators never occur.
        return False
    if x.field.k <= 2:
        table = integral_residue_table(x.field)
        step = scale // den
        idx = 0
        power = 1
        for c in coords:
            idx += ((c * step) % scale) * power
            power *= scale
        return bool(table[idx])
    return _charpoly_integral(x.field, coords, den)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row Hermite normal form of the lattice generated by ``rows``.

    Returns one row per pivot column, pivots positive, entries above each
    pivot reduced into [0, pivot).  For a full-rank lattice in Z^n this is the
    canonical upper-triangular basis.
    """
    work = [list(r) for r in rows if any(r)]
    n = len(rows[0])
    result: list[list[int]] = []
    for col in range(n):
        nz = [r for r in work if r[col]]
        work = [r for r in work if not r[col]]
        if not nz:
            continue
        piv = nz[0]
        for r in nz[1:]:
            a, b = piv[col], r[col]
            g, u, v = _ext_gcd(a, b)
            new_piv = [u * x + v * y for x, y in zip(piv, r)]
            other = [(a // g) * y - (b // g) * x for x, y in zip(piv, r)]
            piv = new_piv
            if any(other):
                work.append(other)
        if piv[col] < 0:
            piv = [-x for x in piv]
        result.append(piv)
    # Reduce entries above each pivot, left pivot first: a reduction only
    # touches columns at or right of its pivot, so earlier columns stay fixed.
    for i in range(len(result)):
        pc = next(j for j, v in enumerate(result[i]) if v)
        for upper in result[:i]:
            q = upper[pc] // result[i][pc]
            if q:
                for j in range(len(upper)):
                    upper[j] -= q * result[i][j]
    return result


@dataclass(frozen=True)
class IntegralBasis:
    field: MultiquadField
    basis: tuple[FieldElement, ...]

    def to_json(self) -> list:
        return [b.to_json() for b in self.basis]

    def index_in_superset(self) -> int:
        """Index of the 2^k-scaled basis lattice inside Z^(2^k) (det of HNF)."""
        scale = 1 << self.field.k
        rows = []
        for b in self.basis:
            den, coords = b.scaled_coords()
            rows.append([c * (scale // den) for c in coords])
        det = 1
        for i, row in enumerate(hnf_rows(rows)):
            det *= row[i]
        return det


def _saturate_biquadratic(field: MultiquadField) -> list[list[int]]:
    """HNF basis (rows scaled by 4) of O_K for any biquadratic field.

    Every element of O_K has coordinates in (1/4)Z, so O_K is generated by
    Z[sqrt(p_I)] together with the integral representatives of the finitely
    many cosets (e/4 with e in {0..3}^4).  Enumerating all 256 representatives
    and saturating is therefore provably exhaustive.
    """
    gens = [[4 if j == i else 0 for j in range(4)] for i in range(4)]
    for e0 in range(4):
        for e1 in range(4):
            for e2 in range(4):
                for e3 in range(4):
                    coords = [e0, e1, e2, e3]
                    if coords == [0, 0, 0, 0]:
                        continue
                    x = field.from_scaled(coords, 4)
                    if is_algebraic_integer(x):
                        gens.append(coords)
    return hnf_rows(gens)


def _lattice_of(field: MultiquadField, elements: list[FieldElement]) -> list[list[int]]:
    scale = 1 << field.k
    rows = []
    for b in elements:
        den, coords = b.scaled_coords()
        rows.append([c * (scale // den) for c in coords])
    return hnf_rows(rows)


def biquadratic_basis(field: MultiquadField) -> IntegralBasis:
    """Integral basis of a biquadratic field, classified by residues mod 4.

    The two residue classes with textbook bases are returned in their explicit
    form (and verified against the saturation lattice); every other class
    falls back to the saturated basis itself, which is exact by construction.
    """
    if field.k != 2:
        raise WrongDegreeError(f"biquadratic basis needs k=2, got k={field.k}")
    sat = _saturate_biquadratic(field)
    d1, d2, d3 = field.radicands[1], field.radicands[2], field.radicands[3]
    table: list[FieldElement] | None = None
    residues = sorted(d % 4 for d in (d1, d2, d3))
    if residues == [1, 1, 1]:
        half_a = (field.one() + field.sqrt_term(d1)) / 2
        half_b = (field.one() + field.sqrt_term(d2)) / 2
        table = [field.one(), half_a, half_b, half_a * half_b]
    elif residues == [2, 2, 3]:
        p = next(d for d in (d1, d2, d3) if d % 4 == 3)
        q, r = sorted(d for d in (d1, d2, d3) if d % 4 == 2)
        table = [
            field.one(),
            field.sqrt_term(p),
            field.sqrt_term(q),
            (field.sqrt_term(q) + field.sqrt_term(r)) / 2,
        ]
    if table is not None and all(is_algebraic_integer(b) for b in table) \
            and _lattice_of(field, table) == sat:
        return IntegralBasis(field, tuple(table))
    return IntegralBasis(field, tuple(field.from_scaled(row, 4) for row in sat))


@dataclass(frozen=True)
class LatticeBox:
    """Finite subset of the superset lattice (1/2^k) Z[sqrt(p_I)].

    ``scaled_bounds[I]`` is the largest integer m with (m/2^k) sqrt(p_I) not
    exceeding the embedding bound, so the box is { sum (n_I/2^k) sqrt(p_I) :
    |n_I| <= scaled_bounds[I] }.  Guaranteed to contain every algebraic
    integer all of whose embeddings are bounded by the inputs.
    """

    field: MultiquadField
    scaled_bounds: tuple[int, ...]
    denominator: int

    @property
    def bounds(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(m, self.denominator) for m in self.scaled_bounds)

    def total_points(self) -> int:
        n = 1
        for m in self.scaled_bounds:
            n *= 2 * m + 1
        return n

    def scan_job(self, emb_lo, emb_hi, *, ell_bound: int = -1,
                 skip_zero: bool = True) -> BoxScan:
        """Kernel job scanning this box against float embedding intervals."""
        field = self.field
        lo = -np.array(self.scaled_bounds, dtype=np.int64)
        hi = np.array(self.scaled_bounds, dtype=np.int64)
        embed = field.embedding_matrix() / self.denominator
        emb_lo = np.asarray(emb_lo, dtype=np.float64)
        emb_hi = np.asarray(emb_hi, dtype=np.float64)
        margin = embedding_margin(emb_lo, emb_hi, embed, lo, hi)
        ell = np.array(field.radicands, dtype=np.int64)
        return BoxScan(lo, hi, embed, emb_lo, emb_hi, margin, ell,
                       int(ell_bound), skip_zero)

    def element(self, coords) -> FieldElement:
        return self.field.from_scaled([int(c) for c in coords], self.denominator)


def trace_simplex_box(field: MultiquadField, trace_bound: int) -> LatticeBox:
    """Box containing every totally positive element with trace <= trace_bound.

    A totally positive beta has coordinates a_I = 2^-k sum_s (+-) sigma_s(beta)
    / sqrt(p_I) with all sigma_s positive, so |a_I| <= Tr(beta) / (2^k sqrt(p_I)).
    That is 2^k times tighter per coordinate than the generic embedding box.
    """
    t = max(0, trace_bound)
    scaled = tuple(isqrt(t * t // p) for p in field.radicands)
    return LatticeBox(field, scaled, 1 << field.k)


def totally_positive_integers_up_to_trace(field: MultiquadField, trace_bound: int,
                                          *, budget: int | None = None) -> list[FieldElement]:
    """Every totally positive x in O_K with Tr(x) <= trace_bound, odometer order.

    The scaled rational coordinate n_0 equals the trace, so dimension zero is
    capped at [1, trace_bound].  Exact confirmation: integrality first
    (integer arithmetic), then total positivity.
    """
    from dataclasses import replace

    from .kernels import scan_box

    if trace_bound < 1:
        return []
    box = trace_simplex_box(field, trace_bound)
    job = box.scan_job(np.zeros(field.degree),
                       np.full(field.degree, float(trace_bound)),
                       skip_zero=False)
    lo = job.lo.copy()
    hi = job.hi.copy()
    lo[0] = 1
    hi[0] = trace_bound
    job = replace(job, lo=lo, hi=hi)
    out = []
    for coords, _ in scan_box(job, budget=budget):
        if not len(coords):
            continue
        for row in coords[integral_mask(field, coords)]:
            x = box.element(row)
            if x.is_totally_positive():
                out.append(x)
    return out


def superset_lattice_box(field: MultiquadField, embedding_bounds) -> LatticeBox:
    """Box of the superset lattice containing all integers bounded as given.

    ``embedding_bounds`` is one nonnegative rational per embedding.  The
    coordinate bound B_I = (max_s bound_s)/sqrt(p_I) is realized exactly on
    the lattice grid: the largest m with m^2 p_I <= (2^k max_s bound_s)^2.
    """
    bounds = [Fraction(b) for b in embedding_bounds]
    if len(bounds) != field.degree:
        raise ValueError(f"need {field.degree} embedding bounds, got {len(bounds)}")
    if any(b < 0 for b in bounds):
        raise ValueError("embedding bounds must be nonnegative")
    big = max(bounds)
    scale = 1 << field.k
    num = (scale * big.numerator) ** 2
    den = big.denominator ** 2
    scaled = tuple(isqrt(num // (den * p)) for p in field.radicands)
    return LatticeBox(field, scaled, scale)
