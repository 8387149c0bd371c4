"""Certification of the pair condition: 4*a_i*a_j >= c^2 forces c = 0.

A witness set a_1, ..., a_N of totally positive integers whose pairs (i < j)
all satisfy the condition rules out universal (N-1)-ary totally positive
quadratic forms, i.e. m(K) >= N.  Each pair verdict comes from a finite,
provably exhaustive enumeration:

* every candidate c with 4ab >= c^2 has |sigma_s(c)| <= 2*sqrt(sigma_s(ab)),
  which converts to a coordinate box of the superset lattice (1/2^k)Z[sqrt(p_I)];
* taking traces gives the exact integer ellipsoid Tr(c^2) <= 4*Tr(ab)
  used as a second pruning condition.

Survivors of the float prefilter are confirmed or rejected in exact rational
arithmetic, in ellipsoid-radius order so small violations surface first.
A candidate that satisfies the order relation but is not an algebraic integer
is a near miss: counted, never a verdict changer.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from math import isqrt
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetExceededError, FieldMismatchError, MqfError
from .fields import FieldElement, MultiquadField, make_field
from .indecomposables import require_totally_positive_integer
from .integers import is_algebraic_integer, superset_lattice_box
from .kernels import scan_box

DEFAULT_PAIR_BUDGET = 10**8
UNPRUNED_POINT_CAP = 4 * 10**6


def sqrt_upper(value: Fraction) -> Fraction:
    """A rational upper bound for sqrt(value), value >= 0; tight to one ulp of 1/den."""
    if value < 0:
        raise ValueError("sqrt of negative bound")
    prod = value.numerator * value.denominator
    root = isqrt(prod)
    if root * root < prod:
        root += 1
    return Fraction(root, value.denominator)


@dataclass(frozen=True)
class PairVerdict:
    i: int
    j: int
    holds: bool
    violating_c: FieldElement | None
    points_scanned: int
    near_misses: int

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "holds": self.holds,
            "c": self.violating_c.to_json() if self.violating_c is not None else None,
            "scanned": self.points_scanned,
            "near_misses": self.near_misses,
        }


@dataclass(frozen=True)
class Certificate:
    field: MultiquadField
    witnesses: tuple[FieldElement, ...]
    pairs: tuple[PairVerdict, ...]
    pair_budget: int
    conclusion: int | None  # m(K) >= conclusion when every pair holds

    lattice_kind = "superset"
    pair_condition = "i<j"

    @property
    def all_hold(self) -> bool:
        return all(p.holds for p in self.pairs)

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "witnesses": [w.to_json() for w in self.witnesses],
            "pairs": [p.to_json() for p in self.pairs],
            "lattice": {"kind": self.lattice_kind,
                        "denominator": 1 << self.field.k},
            "pair_condition": self.pair_condition,
            "pair_budget": self.pair_budget,
            "conclusion": (
                {"m_lower_bound": self.conclusion} if self.conclusion is not None else None
            ),
        }

    @staticmethod
    def from_json(data: Mapping) -> Certificate:
        field = MultiquadField.from_json(data["field"])
        witnesses = tuple(field.element_from_json(w) for w in data["witnesses"])
        pairs = tuple(
            PairVerdict(
                i=int(p["i"]),
                j=int(p["j"]),
                holds=bool(p["holds"]),
                violating_c=(field.element_from_json(p["c"]) if p["c"] is not None else None),
                points_scanned=int(p["scanned"]),
                near_misses=int(p.get("near_misses", 0)),
            )
            for p in data["pairs"]
        )
        conclusion = data.get("conclusion")
        return Certificate(
            field=field,
            witnesses=witnesses,
            pairs=pairs,
            pair_budget=int(data["pair_budget"]),
            conclusion=None if conclusion is None else int(conclusion["m_lower_bound"]),
        )


@dataclass(frozen=True)
class WitnessSet:
    """Elements claimed to satisfy the pair condition; certified only once a
    Certificate from this module is attached."""

    field: MultiquadField
    elements: tuple[FieldElement, ...]
    certificate: Certificate | None = None

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.all_hold

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "elements": [e.to_json() for e in self.elements],
            "certificate": self.certificate.to_json() if self.certificate else None,
        }

    @staticmethod
    def from_json(data: Mapping) -> WitnessSet:
        field = MultiquadField.from_json(data["field"])
        elements = tuple(field.element_from_json(e) for e in data["elements"])
        cert = data.get("certificate")
        return WitnessSet(field, elements,
                          Certificate.from_json(cert) if cert else None)


def _pair_region(a: FieldElement, b: FieldElement):
    """Box + ellipsoid enclosing every candidate c with 4ab >= c^2."""
    field = a.field
    ab = a * b
    bounds = []
    for lo, hi in ab.embedding_enclosures():
        bounds.append(2 * sqrt_upper(max(hi, Fraction(0))))
    box = superset_lattice_box(field, bounds)
    tr_ab = ab.trace()
    assert tr_ab.denominator == 1, "trace of an integral product must be integral"
    ell_bound = 4 * int(tr_ab) * (1 << field.k)
    emb_hi = np.array([float(r) for r in bounds])
    return box, emb_hi, ell_bound


def _confirm_order(coords: np.ndarray, radicands: Sequence[int]) -> list[np.ndarray]:
    """Survivors sorted by (ellipsoid radius, |coords|, sign pattern).

    Small candidates are confirmed first; the positive representative of a
    +-c pair comes before the negative one.
    """
    rows = [tuple(int(v) for v in row) for row in coords]
    rad = list(radicands)

    def key(row):
        radius = sum(n * n * p for n, p in zip(row, rad))
        return (radius, tuple(abs(n) for n in row), tuple(n < 0 for n in row))

    rows.sort(key=key)
    return [np.array(r, dtype=np.int64) for r in rows]


def pair_condition_certify(a: FieldElement, b: FieldElement, *, i: int = 0, j: int = 1,
                           budget: int = DEFAULT_PAIR_BUDGET,
                           collect_all: bool = False):
    """Certify the pair condition for (a, b) by exhaustive enumeration.

    Returns a PairVerdict; with ``collect_all=True`` returns
    (PairVerdict, [all violating c]) for cross-checking enumerations.
    Raises BudgetExceededError when the region cannot be exhausted and no
    violation was found inside the budget (a found violation is already a
    valid verdict).
    """
    if a.field != b.field:
        raise FieldMismatchError("pair elements live in different fields")
    require_totally_positive_integer(a, "witness")
    require_totally_positive_integer(b, "witness")
    field = a.field
    box, emb_hi, ell_bound = _pair_region(a, b)
    fourab = a * b * 4
    job = box.scan_job(-emb_hi, emb_hi, ell_bound=ell_bound, skip_zero=True)
    total = job.total_points()

    survivors = []
    scanned = 0
    for coords, n in scan_box(job, budget=budget):
        scanned += n
        if len(coords):
            survivors.append(coords)
    stacked = (np.concatenate(survivors, axis=0) if survivors
               else np.empty((0, field.degree), dtype=np.int64))

    near_misses = 0
    violations: list[FieldElement] = []
    for row in _confirm_order(stacked, field.radicands):
        c = box.element(row)
        diff = fourab - c * c
        if all(diff.sign_at(s) >= 0 for s in range(field.degree)):
            if is_algebraic_integer(c):
                violations.append(c)
                if not collect_all:
                    break
            else:
                near_misses += 1
    if not violations and scanned < total:
        raise BudgetExceededError(scanned, total, f"pair ({i},{j}) certification")
    verdict = PairVerdict(
        i=i, j=j,
        holds=not violations,
        violating_c=violations[0] if violations else None,
        points_scanned=scanned,
        near_misses=near_misses,
    )
    if collect_all:
        return verdict, violations
    return verdict


def enumerate_violations_unpruned(a: FieldElement, b: FieldElement):
    """Slow independent oracle: same embedding box, no ellipsoid, no prefilter.

    Pure rational arithmetic over every nonzero point; only meant for small
    boxes (tests and spot checks).  Returns (violations, near_misses).
    """
    if a.field != b.field:
        raise FieldMismatchError("pair elements live in different fields")
    field = a.field
    box, _, _ = _pair_region(a, b)
    if box.total_points() > UNPRUNED_POINT_CAP:
        raise BudgetExceededError(0, box.total_points(), "unpruned enumeration")
    fourab = a * b * 4
    violations = []
    near = 0
    ranges = [range(-m, m + 1) for m in box.scaled_bounds]
    for coords in iter_product(*ranges):
        if not any(coords):
            continue
        c = box.element(coords)
        diff = fourab - c * c
        if all(diff.sign_at(s) >= 0 for s in range(field.degree)):
            if is_algebraic_integer(c):
                violations.append(c)
            else:
                near += 1
    return violations, near


def _certify_pair_worker(args):
    primes, a_json, b_json, i, j, budget = args
    field = make_field(list(primes))
    a = field.element_from_json(a_json)
    b = field.element_from_json(b_json)
    try:
        verdict = pair_condition_certify(a, b, i=i, j=j, budget=budget)
        return ("ok", verdict.to_json())
    except BudgetExceededError as exc:
        return ("budget", (exc.points_scanned, exc.points_required, f"pair ({i},{j})"))


def certify_witness_set(witnesses: WitnessSet | Sequence[FieldElement],
                        *, budget: int = DEFAULT_PAIR_BUDGET,
                        jobs: int = 1) -> Certificate:
    """Run the pair condition on all i < j and assemble the certificate.

    N witnesses with every pair holding rule out (N-1)-ary universal forms,
    so the recorded conclusion is m(K) >= N.
    """
    if isinstance(witnesses, WitnessSet):
        field = witnesses.field
        elements = witnesses.elements
    else:
        elements = tuple(witnesses)
        if not elements:
            raise MqfError("cannot certify an empty witness set")
        field = elements[0].field
    for e in elements:
        if e.field != field:
            raise FieldMismatchError("witnesses live in different fields")
        require_totally_positive_integer(e, "witness")
    index_pairs = [(i, j) for i in range(len(elements)) for j in range(i + 1, len(elements))]
    if jobs > 1 and len(index_pairs) > 1:
        tasks = [
            (field.primes, elements[i].to_json(), elements[j].to_json(), i, j, budget)
            for i, j in index_pairs
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_certify_pair_worker, tasks))
        verdicts = []
        for status, payload in results:
            if status == "budget":
                scanned, required, what = payload
                raise BudgetExceededError(scanned, required, what)
            p = payload
            verdicts.append(PairVerdict(
                i=p["i"], j=p["j"], holds=p["holds"],
                violating_c=(field.element_from_json(p["c"]) if p["c"] is not None else None),
                points_scanned=p["scanned"], near_misses=p["near_misses"],
            ))
    else:
        verdicts = [
            pair_condition_certify(elements[i], elements[j], i=i, j=j, budget=budget)
            for i, j in index_pairs
        ]
    all_hold = all(v.holds for v in verdicts)
    return Certificate(
        field=field,
        witnesses=elements,
        pairs=tuple(verdicts),
        pair_budget=budget,
        conclusion=len(elements) if all_hold else None,
    )


def verify_certificate(data: Mapping, *, jobs: int = 1) -> list[str]:
    """Re-derive everything in a serialized certificate; return mismatches.

    An empty list means the certificate verified bit-for-bit: same pair
    verdicts, same violating elements, same point counts, same conclusion,
    and all witnesses re-validated as totally positive integers.
    """
    problems: list[str] = []
    cert = Certificate.from_json(data)
    lattice = data.get("lattice", {})
    if lattice.get("kind") != "superset" or int(lattice.get("denominator", 0)) != 1 << cert.field.k:
        problems.append("lattice description does not match the field")
    if data.get("pair_condition") != "i<j":
        problems.append("unexpected pair condition")
    for w in cert.witnesses:
        try:
            require_totally_positive_integer(w, "witness")
        except MqfError as exc:
            problems.append(f"witness invalid: {exc}")
    if problems:
        # recomputation needs valid witnesses; invalid ones already refute
        return problems
    n = len(cert.witnesses)
    expected_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if [(p.i, p.j) for p in cert.pairs] != expected_pairs:
        problems.append("pair list does not cover exactly the indices i<j")
        return problems
    fresh = certify_witness_set(WitnessSet(cert.field, cert.witnesses),
                                budget=cert.pair_budget, jobs=jobs)
    for recorded, recomputed in zip(cert.pairs, fresh.pairs):
        tag = f"pair ({recorded.i},{recorded.j})"
        if recorded.holds != recomputed.holds:
            problems.append(f"{tag}: holds={recorded.holds} but recomputation says {recomputed.holds}")
        if recorded.violating_c != recomputed.violating_c:
            problems.append(f"{tag}: violating c mismatch")
        if recorded.points_scanned != recomputed.points_scanned:
            problems.append(f"{tag}: points_scanned {recorded.points_scanned} != {recomputed.points_scanned}")
        if recorded.near_misses != recomputed.near_misses:
            problems.append(f"{tag}: near_misses {recorded.near_misses} != {recomputed.near_misses}")
    if cert.conclusion != fresh.conclusion:
        problems.append(f"conclusion {cert.conclusion} != recomputed {fresh.conclusion}")
    elif cert.conclusion is not None and cert.conclusion != n:
        problems.append(f"conclusion {cert.conclusion} does not match witness count {n}")
    return problems


def dumps_canonical(payload: dict) -> str:
    """Deterministic JSON encoding used for every artifact file."""
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
