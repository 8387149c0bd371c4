"""Exact arithmetic in totally real multiquadratic fields Q(sqrt(p_1), ..., sqrt(p_k)).

Elements are stored as sparse maps from subset bitmasks to exact rational
coefficients over the basis {sqrt(p_I)}, where p_I is the squarefree part of
prod_{i in I} p_i.  Bit i of a mask corresponds to the generator p_{i+1}.
All decisions (signs, orderings, total positivity) are made in exact rational
arithmetic; floating point appears only in optional prefilters and never in a
decision path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DegenerateFieldError,
    EmptyPrimeListError,
    FieldMismatchError,
    NonRationalCoefficientError,
    NonRationalNormError,
    NotSquarefreeError,
    PairwiseCoprimeError,
)

RationalLike = int | Fraction


def squarefree_part(n: int) -> int:
    """Largest squarefree divisor d of n with n/d a perfect square (n >= 1)."""
    if n < 1:
        raise ValueError("squarefree_part requires n >= 1")
    part = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            if e % 2:
                part *= d
        d += 1 if d == 2 else 2
    return part * n


def is_squarefree(n: int) -> bool:
    return n >= 1 and squarefree_part(n) == n


def sqrt_enclosure(n: int, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Exact rational interval [lo, hi] with lo <= sqrt(n) <= hi, width 2^-bits."""
    scale = 1 << bits
    root = isqrt(n * scale * scale)
    return Fraction(root, scale), Fraction(root + 1, scale)


@dataclass(frozen=True)
class EmbeddingSigns:
    """A real embedding, recorded as the sign it gives each generator sqrt(p_i)."""

    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("embedding signs must be +1 or -1")

    @classmethod
    def from_mask(cls, k: int, mask: int) -> EmbeddingSigns:
        return cls(tuple(-1 if mask >> i & 1 else 1 for i in range(k)))

    @classmethod
    def identity(cls, k: int) -> EmbeddingSigns:
        return cls((1,) * k)

    @property
    def mask(self) -> int:
        return sum(1 << i for i, s in enumerate(self.signs) if s < 0)

    def sign_on_subset(self, subset_mask: int) -> int:
        """Induced sign on sqrt(p_I): product of the generator signs in I."""
        return -1 if (self.mask & subset_mask).bit_count() % 2 else 1

    def compose(self, other: EmbeddingSigns) -> EmbeddingSigns:
        return EmbeddingSigns.from_mask(len(self.signs), self.mask ^ other.mask)


def _as_mask(embedding: EmbeddingSigns | int) -> int:
    return embedding.mask if isinstance(embedding, EmbeddingSigns) else embedding


class MultiquadField:
    """The field Q(sqrt(p_1), ..., sqrt(p_k)) with precomputed subset tables.

    Immutable after construction.  Use :func:`make_field` to build one with
    full validation.
    """

    __slots__ = (
        "primes", "k", "degree", "radicands", "mult",
        "_embed_matrix", "_value_to_mask", "_sqrt_cache", "_residue_cache",
    )

    def __init__(self, primes: tuple[int, ...], radicands: tuple[int, ...]):
        self.primes = primes
        self.k = len(primes)
        self.degree = 1 << self.k
        self.radicands = radicands
        # mult[i][j] = m with sqrt(p_I)*sqrt(p_J) = m*sqrt(p_{I xor J});
        # for squarefree radicands m is exactly gcd(p_I, p_J).
        self.mult = tuple(
            tuple(gcd(radicands[i], radicands[j]) for j in range(self.degree))
            for i in range(self.degree)
        )
        for i in range(self.degree):
            for j in range(self.degree):
                m = self.mult[i][j]
                if m * m * radicands[i ^ j] != radicands[i] * radicands[j]:
                    raise DegenerateFieldError(
                        f"inconsistent product table at subsets {i}, {j}"
                    )
        self._value_to_mask = {radicands[m]: m for m in range(self.degree)}
        self._embed_matrix: np.ndarray | None = None
        self._sqrt_cache: dict[int, tuple[Fraction, Fraction]] = {}
        self._residue_cache: np.ndarray | None = None  # filled by integers.py

    # -- identity ---------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiquadField) and self.primes == other.primes

    def __hash__(self) -> int:
        return hash(self.primes)

    def __repr__(self) -> str:
        inside = ", ".join(f"sqrt({p})" for p in self.primes)
        return f"Q({inside})"

    # -- element constructors ---------------------------------------------

    def element(self, coeffs: Mapping[int, RationalLike | str]) -> FieldElement:
        clean: dict[int, Fraction] = {}
        for mask, c in coeffs.items():
            mask = int(mask)
            if not 0 <= mask < self.degree:
                raise ValueError(f"subset mask {mask} out of range for k={self.k}")
            frac = Fraction(c)
            if frac:
                clean[mask] = frac
        return FieldElement(self, clean)

    def zero(self) -> FieldElement:
        return FieldElement(self, {})

    def one(self) -> FieldElement:
        return FieldElement(self, {0: Fraction(1)})

    def rational(self, value: RationalLike) -> FieldElement:
        return self.element({0: Fraction(value)})

    def sqrt_term(self, radicand: int, coeff: RationalLike = 1) -> FieldElement:
        """The element coeff * sqrt(radicand); radicand must be some p_I."""
        mask = self._value_to_mask.get(radicand)
        if mask is None:
            raise ValueError(
                f"sqrt({radicand}) is not a basis radicand of {self!r}; "
                f"available: {sorted(self._value_to_mask)}"
            )
        return self.element({mask: coeff})

    def from_scaled(self, coords: Iterable[int], denominator: int) -> FieldElement:
        return self.element(
            {m: Fraction(n, denominator) for m, n in enumerate(coords) if n}
        )

    # -- embeddings ---------------------------------------------------------

    def embeddings(self) -> list[EmbeddingSigns]:
        return [EmbeddingSigns.from_mask(self.k, m) for m in range(self.degree)]

    def embedding_matrix(self) -> np.ndarray:
        """float64 matrix M with M[s, I] = (sign of sqrt(p_I) under s) * sqrt(p_I)."""
        if self._embed_matrix is None:
            roots = np.sqrt(np.array(self.radicands, dtype=np.float64))
            mat = np.empty((self.degree, self.degree), dtype=np.float64)
            for s in range(self.degree):
                for m in range(self.degree):
                    sign = -1.0 if (s & m).bit_count() % 2 else 1.0
                    mat[s, m] = sign * roots[m]
            self._embed_matrix = mat
        return self._embed_matrix

    def sqrt_bounds(self, mask: int, bits: int = 64) -> tuple[Fraction, Fraction]:
        cached = self._sqrt_cache.get(mask)
        if cached is None:
            cached = sqrt_enclosure(self.radicands[mask], bits)
            self._sqrt_cache[mask] = cached
        return cached

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {"primes": list(self.primes)}

    @staticmethod
    def from_json(data: Mapping) -> MultiquadField:
        return make_field(list(data["primes"]))

    def element_from_json(self, data: Mapping) -> FieldElement:
        coeffs = data["coeffs"]
        return self.element({int(mask): Fraction(val) for mask, val in coeffs.items()})


def make_field(primes: list[int] | tuple[int, ...]) -> MultiquadField:
    """Build and validate Q(sqrt(p_1), ..., sqrt(p_k)).

    Rejects generator lists that collapse the degree below 2^k (some product
    of generators rational), non-squarefree entries, and, for k >= 3,
    non-pairwise-coprime entries.
    """
    entries = [int(p) for p in primes]
    if not entries:
        raise EmptyPrimeListError("at least one generator is required")
    for p in entries:
        if p < 2:
            raise DegenerateFieldError(f"generator {p} is not a valid radicand (need >= 2)")
    # Degeneracy is judged on squarefree parts so that e.g. [2, 8] reports the
    # degree collapse rather than the squarefree violation.
    reduced = [squarefree_part(p) for p in entries]
    k = len(entries)
    radicands = [1] * (1 << k)
    for i, p in enumerate(reduced):
        bit = 1 << i
        for mask in range(bit):
            g = gcd(radicands[mask], p)
            radicands[mask | bit] = (radicands[mask] // g) * (p // g)
    if len(set(radicands)) != 1 << k:
        raise DegenerateFieldError(
            f"generators {entries} span degree < 2^{k}: subset radicands collide "
            f"(some product of generators is a perfect square)"
        )
    for i, p in enumerate(entries):
        if reduced[i] != p:
            raise NotSquarefreeError(p)
    if k >= 3:
        for i in range(k):
            for j in range(i + 1, k):
                if gcd(entries[i], entries[j]) != 1:
                    raise PairwiseCoprimeError(
                        f"k >= 3 requires pairwise coprime generators; "
                        f"gcd({entries[i]}, {entries[j]}) > 1"
                    )
    return MultiquadField(tuple(entries), tuple(radicands))


def _mul_dicts(field: MultiquadField, a: Mapping[int, Fraction],
               b: Mapping[int, Fraction]) -> dict[int, Fraction]:
    mult = field.mult
    out: dict[int, Fraction] = {}
    for i, ca in a.items():
        row = mult[i]
        for j, cb in b.items():
            target = i ^ j
            term = ca * cb * row[j]
            if target in out:
                out[target] += term
            else:
                out[target] = term
    return {m: c for m, c in out.items() if c}


def _mul_int_dicts(field: MultiquadField, a: Mapping[int, int],
                   b: Mapping[int, int]) -> dict[int, int]:
    """Integer-coefficient product; avoids Fraction overhead on hot paths."""
    mult = field.mult
    out: dict[int, int] = {}
    for i, ca in a.items():
        row = mult[i]
        for j, cb in b.items():
            target = i ^ j
            term = ca * cb * row[j]
            if target in out:
                out[target] += term
            else:
                out[target] = term
    return {m: c for m, c in out.items() if c}


def _sign_rec(field: MultiquadField, coeffs: Mapping[int, Fraction],
              smask: int, level: int) -> int:
    """Exact sign of sigma_s(x) for x supported on masks < 2^level.

    Splits x = u + v*sqrt(p_top) over the subfield of the first level-1
    generators and decides by the signs of u, v and u^2 - p_top*v^2, recursing
    to plain rational signs at level 0.
    """
    if level == 0:
        c = coeffs.get(0, Fraction(0))
        return (c > 0) - (c < 0)
    top = 1 << (level - 1)
    p_top = field.radicands[top]
    u: dict[int, Fraction] = {}
    v: dict[int, Fraction] = {}
    for mask, c in coeffs.items():
        if mask & top:
            low = mask ^ top
            # sqrt(p_mask) = sqrt(p_low) * sqrt(p_top) / m
            v[low] = c / field.mult[low][top]
        else:
            u[mask] = c
    s_top = -1 if smask & top else 1
    su = _sign_rec(field, u, smask, level - 1)
    sv = s_top * _sign_rec(field, v, smask, level - 1)
    if sv == 0:
        return su
    if su == 0:
        return sv
    if su == sv:
        return su
    w = _mul_dicts(field, u, u)
    pv2 = _mul_dicts(field, v, v)
    for mask, c in pv2.items():
        c *= p_top
        if mask in w:
            w[mask] -= c
        else:
            w[mask] = -c
    return su * _sign_rec(field, w, smask, level - 1)


class FieldElement:
    """Exact element of a :class:`MultiquadField`; immutable value type."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: MultiquadField, coeffs: dict[int, Fraction]):
        self.field = field
        self.coeffs = coeffs
        self._hash: int | None = None

    # -- basics -------------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.rational(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.field.primes, frozenset(self.coeffs.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for mask in sorted(self.coeffs):
            c = self.coeffs[mask]
            if mask == 0:
                parts.append(str(c))
            else:
                tok = f"s{self.field.radicands[mask]}"
                if c == 1:
                    parts.append(tok)
                elif c == -1:
                    parts.append(f"-{tok}")
                else:
                    parts.append(f"{c}*{tok}")
        out = parts[0]
        for part in parts[1:]:
            out += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return out

    def _coerce(self, other: FieldElement | RationalLike) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"cannot combine elements of {self.field!r} and {other.field!r}"
                )
            return other
        return self.field.rational(other)

    # -- ring operations ------------------------------------------------------

    def __add__(self, other: FieldElement | RationalLike) -> FieldElement:
        other = self._coerce(other)
        out = dict(self.coeffs)
        for mask, c in other.coeffs.items():
            s = out.get(mask, Fraction(0)) + c
            if s:
                out[mask] = s
            else:
                out.pop(mask, None)
        return FieldElement(self.field, out)

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: FieldElement | RationalLike) -> FieldElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other: FieldElement | RationalLike) -> FieldElement:
        return (-self) + other

    def __mul__(self, other: FieldElement | RationalLike) -> FieldElement:
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return self.field.zero()
            return FieldElement(self.field, {m: c * other for m, c in self.coeffs.items()})
        other = self._coerce(other)
        return FieldElement(self.field, _mul_dicts(self.field, self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> FieldElement:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        out = self.field.one()
        base = self
        n = exponent
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other: FieldElement | RationalLike) -> FieldElement:
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                raise ZeroDivisionError("division by zero")
            return self * (1 / other)
        return self * self._coerce(other).inverse()

    def inverse(self) -> FieldElement:
        if not self.coeffs:
            raise ZeroDivisionError("zero has no inverse")
        prod = self.field.one()
        for smask in range(1, self.field.degree):
            prod = prod * self.conjugate(smask)
        return prod * (1 / self.norm())

    # -- Galois action and invariants ----------------------------------------

    def conjugate(self, embedding: EmbeddingSigns | int) -> FieldElement:
        smask = _as_mask(embedding)
        out = {}
        for mask, c in self.coeffs.items():
            out[mask] = -c if (smask & mask).bit_count() % 2 else c
        return FieldElement(self.field, out)

    def trace(self) -> Fraction:
        """Trace to Q: 2^k times the rational coefficient."""
        return self.field.degree * self.coeffs.get(0, Fraction(0))

    def norm(self) -> Fraction:
        """Product of all 2^k conjugates, verified to be rational."""
        prod = self.field.one()
        for smask in range(self.field.degree):
            prod = prod * self.conjugate(smask)
        for mask, c in prod.coeffs.items():
            if mask != 0 and c:
                raise NonRationalNormError(
                    f"conjugate product has residual sqrt({self.field.radicands[mask]}) term"
                )
        return prod.coeffs.get(0, Fraction(0))

    def char_poly(self) -> list[Fraction]:
        """Coefficients of prod_s (T - sigma_s(x)), constant term first, monic."""
        field = self.field
        poly: list[FieldElement] = [field.one()]
        for smask in range(field.degree):
            conj = self.conjugate(smask)
            nxt = [field.zero() for _ in range(len(poly) + 1)]
            for d, coeff in enumerate(poly):
                nxt[d + 1] = nxt[d + 1] + coeff
                nxt[d] = nxt[d] - coeff * conj
            poly = nxt
        out: list[Fraction] = []
        for coeff in poly:
            for mask, c in coeff.coeffs.items():
                if mask != 0 and c:
                    raise NonRationalCoefficientError(
                        "characteristic polynomial has a non-rational coefficient"
                    )
            out.append(coeff.coeffs.get(0, Fraction(0)))
        return out

    # -- order and sign decisions ----------------------------------------------

    def sign_at(self, embedding: EmbeddingSigns | int) -> int:
        """Exact sign of sigma_s(x) in {-1, 0, +1}; no floating point involved."""
        return _sign_rec(self.field, self.coeffs, _as_mask(embedding), self.field.k)

    def signs(self) -> list[int]:
        return [self.sign_at(s) for s in range(self.field.degree)]

    def succeq(self, other: FieldElement | RationalLike) -> bool:
        """self >= other in the total-positivity partial order (equality allowed)."""
        diff = self - self._coerce(other)
        return all(diff.sign_at(s) >= 0 for s in range(self.field.degree))

    def succ(self, other: FieldElement | RationalLike) -> bool:
        """self - other is totally positive (strict at every embedding)."""
        diff = self - self._coerce(other)
        return all(diff.sign_at(s) > 0 for s in range(self.field.degree))

    def is_totally_positive(self) -> bool:
        return self.succ(0)

    # -- numeric views -----------------------------------------------------------

    def embedding_floats(self) -> np.ndarray:
        vec = np.zeros(self.field.degree, dtype=np.float64)
        for mask, c in self.coeffs.items():
            vec[mask] = float(c)
        return self.field.embedding_matrix() @ vec

    def embedding_enclosures(self, bits: int = 64) -> list[tuple[Fraction, Fraction]]:
        """Exact rational intervals containing each sigma_s(x)."""
        out = []
        for smask in range(self.field.degree):
            lo = Fraction(0)
            hi = Fraction(0)
            for mask, c in self.coeffs.items():
                rlo, rhi = self.field.sqrt_bounds(mask, bits)
                if (smask & mask).bit_count() % 2:
                    rlo, rhi = -rhi, -rlo
                if c >= 0:
                    lo += c * rlo
                    hi += c * rhi
                else:
                    lo += c * rhi
                    hi += c * rlo
            out.append((lo, hi))
        return out

    def scaled_coords(self) -> tuple[int, list[int]]:
        """(d, n) with coefficient on mask m equal to n[m]/d and d minimal."""
        den = 1
        for c in self.coeffs.values():
            den = den * c.denominator // gcd(den, c.denominator)
        coords = [0] * self.field.degree
        for mask, c in self.coeffs.items():
            coords[mask] = int(c * den)
        return den, coords

    # -- serialization -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "coeffs": {
                str(mask): f"{c.numerator}/{c.denominator}"
                for mask, c in sorted(self.coeffs.items())
            }
        }
