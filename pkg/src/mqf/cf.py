"""Continued fractions for sqrt(D) and certified quadratic witness search.

The base case of the tower construction lives here: real quadratic fields
supply the initial witness sets, found by search over the indecomposable pool
and certified pair by pair.  Nothing is taken on faith at runtime: a returned
WitnessSet always carries its own enumeration certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .certifier import (
    DEFAULT_PAIR_BUDGET,
    WitnessSet,
    certify_witness_set,
    pair_condition_certify,
)
from .errors import (
    BudgetExceededError,
    NotSquarefreeError,
    PerfectSquareError,
    WitnessNotFoundError,
)
from .fields import FieldElement, MultiquadField, make_field, is_squarefree
from .indecomposables import DEFAULT_ORACLE_BUDGET, exhaustive_indecomposable

DEFAULT_TRACE_BOUND = 1000
DEFAULT_SCAN_LIMIT = 100_000


@dataclass(frozen=True)
class CFExpansion:
    """Periodic continued fraction of sqrt(D): [a0; period] with minimal period."""

    D: int
    a0: int
    period: tuple[int, ...]
    q_values: tuple[int, ...]  # Q_1..Q_L of the (P, Q) recurrence

    def partial_quotient(self, n: int) -> int:
        if n == 0:
            return self.a0
        return self.period[(n - 1) % len(self.period)]

    def q_value(self, n: int) -> int:
        """Q_n of the recurrence; Q_0 = 1 and the rest are periodic."""
        if n == 0:
            return 1
        return self.q_values[(n - 1) % len(self.q_values)]

    def to_json(self) -> dict:
        return {"D": self.D, "a0": self.a0, "period": list(self.period)}


def cf_expand(D: int) -> CFExpansion:
    """Exact periodic expansion of sqrt(D) via the integer (P, Q) recurrence."""
    if D < 2:
        raise NotSquarefreeError(D, "D")
    a0 = isqrt(D)
    if a0 * a0 == D:
        raise PerfectSquareError(f"{D} is a perfect square")
    if not is_squarefree(D):
        raise NotSquarefreeError(D, "D")
    period = []
    q_values = []
    P, Q, a = 0, 1, a0
    while True:
        P = a * Q - P
        Q = (D - P * P) // Q
        a = (a0 + P) // Q
        period.append(a)
        q_values.append(Q)
        if Q == 1:
            return CFExpansion(D, a0, tuple(period), tuple(q_values))


def convergents(cf: CFExpansion, count: int) -> list[tuple[int, int]]:
    """First ``count`` convergents (p_n, q_n), n = 0 .. count-1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    p_prev, p_cur = 1, cf.a0
    q_prev, q_cur = 0, 1
    out.append((p_cur, q_cur))
    for n in range(1, count):
        a = cf.partial_quotient(n)
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        out.append((p_cur, q_cur))
    return out


def _quadratic_lattice_arrays(field: MultiquadField, trace_bound: int):
    """All (n0, n1) with x = (n0 + n1 sqrt(D))/2 integral, totally positive,
    Tr(x) = n0 <= trace_bound.  Entirely exact in int64 arithmetic."""
    D = field.radicands[1]
    if trace_bound < 1:
        return np.empty((0, 2), dtype=np.int64)
    n1_max = isqrt(trace_bound * trace_bound // D)
    n0 = np.arange(1, trace_bound + 1, dtype=np.int64)
    n1 = np.arange(-n1_max, n1_max + 1, dtype=np.int64)
    g0, g1 = np.meshgrid(n0, n1, indexing="ij")
    g0 = g0.ravel()
    g1 = g1.ravel()
    # Integrality in (1/2)Z[sqrt(D)]: even/even always; odd/odd only for D = 1 mod 4.
    both_even = ((g0 & 1) == 0) & ((g1 & 1) == 0)
    if D % 4 == 1:
        integral = both_even | (((g0 & 1) == 1) & ((g1 & 1) == 1))
    else:
        integral = both_even
    positive = g0 * g0 > D * g1 * g1  # with n0 > 0 this is total positivity
    keep = integral & positive
    coords = np.stack([g0[keep], g1[keep]], axis=1)
    order = np.lexsort((coords[:, 1], coords[:, 0]))
    return coords[order]


def quadratic_candidates(cf: CFExpansion, trace_bound: int,
                         oracle_budget: int = DEFAULT_ORACLE_BUDGET) -> list[FieldElement]:
    """All totally positive integers of Q(sqrt(D)) with trace <= trace_bound
    that the exhaustive oracle confirms indecomposable, ordered by trace."""
    field = make_field([cf.D])
    out = []
    for n0, n1 in _quadratic_lattice_arrays(field, trace_bound):
        x = field.from_scaled([int(n0), int(n1)], 2)
        verdict = exhaustive_indecomposable(x, oracle_budget)
        if verdict.verdict.is_indecomposable:
            out.append(x)
    return out


def _norm_scaled(D: int, n0: int, n1: int) -> Fraction:
    return Fraction(n0 * n0 - D * n1 * n1, 4)


def _minkowski_covol_sq(D: int) -> int:
    # Squared covolume of O_K under both real embeddings (= discriminant).
    return D if D % 4 == 1 else 4 * D


def _pairs_possible(D: int, norms: list[Fraction], i: int, j: int) -> bool:
    """Necessary condition from Minkowski's theorem: the candidate rectangle
    for the pair misses lattice points only if 16 N(a_i) N(a_j) < disc."""
    return 16 * norms[i] * norms[j] < _minkowski_covol_sq(D)


def _search_pool(field: MultiquadField, pool: list[FieldElement], n_wanted: int,
                 pair_budget: int) -> tuple[list[FieldElement] | None, bool]:
    """Greedy depth-first selection by increasing trace with backtracking.

    Returns (witnesses or None, budget_limited).
    """
    D = field.radicands[1]
    norms = [x.norm() for x in pool]
    cache: dict[tuple[int, int], bool] = {}
    budget_limited = False

    def pair_ok(i: int, j: int) -> bool:
        nonlocal budget_limited
        key = (i, j)
        if key not in cache:
            if not _pairs_possible(D, norms, i, j):
                cache[key] = False
            else:
                try:
                    cache[key] = pair_condition_certify(
                        pool[i], pool[j], i=i, j=j, budget=pair_budget).holds
                except BudgetExceededError:
                    budget_limited = True
                    cache[key] = False
        return cache[key]

    chosen: list[int] = []

    def extend(start: int) -> bool:
        if len(chosen) == n_wanted:
            return True
        for idx in range(start, len(pool)):
            if all(pair_ok(prev, idx) for prev in chosen):
                chosen.append(idx)
                if extend(idx + 1):
                    return True
                chosen.pop()
        return False

    if extend(0):
        return [pool[i] for i in chosen], budget_limited
    return None, budget_limited


def search_witnesses(D: int, N: int, trace_bound: int = DEFAULT_TRACE_BOUND,
                     *, pair_budget: int = DEFAULT_PAIR_BUDGET,
                     oracle_budget: int = DEFAULT_ORACLE_BUDGET) -> WitnessSet:
    """Find and certify N witnesses in Q(sqrt(D)) from the indecomposable pool.

    Raises WitnessNotFoundError when the pool admits no certified set; that is
    a statement about this D and these bounds only, never a refutation.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    cf = cf_expand(D)
    field = make_field([D])
    pool = quadratic_candidates(cf, trace_bound, oracle_budget)
    if len(pool) < N:
        raise WitnessNotFoundError(
            f"pool for D={D} has only {len(pool)} indecomposables with trace <= {trace_bound}"
        )
    witnesses, budget_limited = _search_pool(field, pool, N, pair_budget)
    if witnesses is None:
        raise WitnessNotFoundError(
            f"no certified witness set of size {N} in the pool for D={D} "
            f"(pool size {len(pool)}, trace bound {trace_bound})",
            budget_limited=budget_limited,
        )
    cert = certify_witness_set(witnesses, budget=pair_budget)
    assert cert.all_hold, "search returned a set its own certification rejects"
    return WitnessSet(field, tuple(witnesses), cert)


def _thin_pool(field: MultiquadField, trace_bound: int,
               oracle_budget: int) -> list[FieldElement]:
    """Pool of all indecomposables that could appear in a certified set.

    Two exact necessary conditions prune candidates before the oracle runs,
    and neither can exclude a usable witness:

    * norm < D/4 - otherwise Minkowski's theorem puts a violating c inside
      any pair's candidate rectangle;
    * minimal embedding < 1 (except for 1 itself) - an element with every
      embedding above 1 decomposes as 1 + (x - 1) and is not indecomposable.
    """
    D = field.radicands[1]
    coords = _quadratic_lattice_arrays(field, trace_bound)
    if not len(coords):
        return []
    n0 = coords[:, 0]
    n1 = coords[:, 1]
    norm4 = n0 * n0 - D * n1 * n1  # 4*N(x), positive here
    small_norm = norm4 < D
    thin = (n0 - 2) * (n0 - 2) < D * n1 * n1  # min embedding < 1
    keep = small_norm & thin
    pool = [field.one()]
    for row in coords[keep]:
        x = field.from_scaled([int(row[0]), int(row[1])], 2)
        if x == 1:
            continue
        verdict = exhaustive_indecomposable(x, oracle_budget)
        if verdict.verdict.is_indecomposable:
            pool.append(x)
    return pool


def scan_for_witnesses(N: int, *, d_limit: int = DEFAULT_SCAN_LIMIT,
                       trace_bound: int = DEFAULT_TRACE_BOUND,
                       pair_budget: int = DEFAULT_PAIR_BUDGET,
                       oracle_budget: int = DEFAULT_ORACLE_BUDGET,
                       d_start: int = 2) -> WitnessSet:
    """Scan D upward until some Q(sqrt(D)) yields a certified N-witness set.

    Per D the candidate pool is pruned by exact necessary conditions (see
    _thin_pool) and the trace cap escalates to the full trace_bound when a
    cheap first pass fails, so a D is skipped only when the full-bound pool
    genuinely admits no certified set.  The returned set is always fully
    certified.  Raises WitnessNotFoundError if the scan limit is reached.
    """
    budget_limited = False
    for D in range(max(2, d_start), d_limit + 1):
        root = isqrt(D)
        if root * root == D or not is_squarefree(D):
            continue
        field = make_field([D])
        caps = [min(trace_bound, 8 * root + 16)]
        if caps[0] < trace_bound:
            caps.append(trace_bound)
        witnesses = None
        for cap in caps:
            pool = _thin_pool(field, cap, oracle_budget)
            if len(pool) < N:
                continue
            witnesses, limited = _search_pool(field, pool, N, pair_budget)
            budget_limited = budget_limited or limited
            if witnesses is not None:
                break
        if witnesses is not None:
            cert = certify_witness_set(witnesses, budget=pair_budget)
            assert cert.all_hold
            return WitnessSet(field, tuple(witnesses), cert)
    raise WitnessNotFoundError(
        f"no certified {N}-witness set found for any squarefree D <= {d_limit}",
        budget_limited=budget_limited,
    )
