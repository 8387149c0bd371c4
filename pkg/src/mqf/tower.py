"""Inductive tower construction: extend a certified witness set upward.

Given witnesses in K = Q(sqrt(p_1), ..., sqrt(p_k)) satisfying the pair
condition, adjoining sqrt(q) for a suitable squarefree q preserves the
condition.  The choice of q is governed by three machine-checkable bounds:

* sqrt(q) > 2^(k+1), stored exactly as q > 4^(k+1);
* sqrt(q) > 8 * Tr_K(a_i a_j) for every pair, stored as q > 64 * maxTr^2;
* gcd(q, p_i) = 1 for every generator.

The headline claim for the top field therefore rests on the base certificate
(machine-enumerated) plus these constraint logs (machine-checked integers);
re-certifying in the extension is exposed separately because its enumeration
region grows with q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping

from .certifier import Certificate, WitnessSet, certify_witness_set
from .cf import search_witnesses
from .errors import (
    BaseWitnessNotFoundError,
    DegeneratePartError,
    MqfError,
    NotIntegralError,
    WitnessNotFoundError,
)
from .fields import FieldElement, MultiquadField, make_field, is_squarefree
from .integers import is_algebraic_integer

DEFAULT_TRACE_BOUND = 1000


@dataclass(frozen=True)
class TowerStep:
    """One induction step K -> K(sqrt(q)) with its exact constraint log."""

    base_primes: tuple[int, ...]
    chosen_q: int
    degree_threshold: int      # 4^(k+1), from sqrt(q) > 2^(k+1)
    trace_threshold: int       # 64 * max_pair_trace^2, from sqrt(q) > 8 Tr_K(a_i a_j)
    max_pair_trace: int
    offset: int

    def constraints_hold(self) -> bool:
        """Replay all three bounds with integer arithmetic only."""
        q = self.chosen_q
        return (
            q > self.degree_threshold
            and q > self.trace_threshold
            and self.trace_threshold == 64 * self.max_pair_trace ** 2
            and self.degree_threshold == 4 ** (len(self.base_primes) + 1)
            and all(gcd(q, p) == 1 for p in self.base_primes)
            and is_squarefree(q)
        )

    def to_json(self) -> dict:
        return {
            "base_primes": list(self.base_primes),
            "q": self.chosen_q,
            "degree_threshold": self.degree_threshold,
            "trace_threshold": self.trace_threshold,
            "max_pair_trace": self.max_pair_trace,
            "offset": self.offset,
        }

    @staticmethod
    def from_json(data: Mapping) -> TowerStep:
        return TowerStep(
            base_primes=tuple(int(p) for p in data["base_primes"]),
            chosen_q=int(data["q"]),
            degree_threshold=int(data["degree_threshold"]),
            trace_threshold=int(data["trace_threshold"]),
            max_pair_trace=int(data["max_pair_trace"]),
            offset=int(data["offset"]),
        )


def max_pair_trace(witnesses: WitnessSet) -> int:
    """max over i<j of Tr_K(a_i a_j); witnesses are integral so this is an integer."""
    elements = witnesses.elements
    best = Fraction(0)
    for i in range(len(elements)):
        for j in range(i + 1, len(elements)):
            t = (elements[i] * elements[j]).trace()
            if t > best:
                best = t
    assert best.denominator == 1
    return int(best)


def select_next_q(field: MultiquadField, witnesses: WitnessSet, offset: int = 0) -> TowerStep:
    """The (offset+1)-th smallest squarefree q satisfying all three bounds.

    Always terminates: squarefree integers have positive density and the
    constraints only exclude finitely many residues.
    """
    if witnesses.field != field:
        raise MqfError("witness set does not belong to the given field")
    k = field.k
    m = max_pair_trace(witnesses)
    degree_threshold = 4 ** (k + 1)
    trace_threshold = 64 * m * m
    q = max(degree_threshold, trace_threshold)
    remaining = offset
    while True:
        q += 1
        if not all(gcd(q, p) == 1 for p in field.primes):
            continue
        if not is_squarefree(q):
            continue
        if remaining == 0:
            return TowerStep(
                base_primes=field.primes,
                chosen_q=q,
                degree_threshold=degree_threshold,
                trace_threshold=trace_threshold,
                max_pair_trace=m,
                offset=offset,
            )
        remaining -= 1


def lift_witnesses(step: TowerStep, witnesses: WitnessSet) -> WitnessSet:
    """Re-express the witnesses in L = K(sqrt(q)); certification is cleared.

    Coefficient masks are unchanged (the new generator occupies the top bit),
    and the lift must double every trace, which is asserted.
    """
    if witnesses.field.primes != step.base_primes:
        raise MqfError("tower step does not match the witness field")
    if not step.constraints_hold():
        raise MqfError("tower step constraints do not hold")
    top = make_field(list(step.base_primes) + [step.chosen_q])
    lifted = []
    for x in witnesses.elements:
        y = top.element(dict(x.coeffs))
        assert y.trace() == 2 * x.trace(), "relative trace identity violated"
        lifted.append(y)
    return WitnessSet(top, tuple(lifted), certificate=None)


@dataclass(frozen=True)
class Tower:
    """A certified base plus constraint-checked extension steps."""

    base_d: int
    base_certificate: Certificate
    steps: tuple[TowerStep, ...]
    witnesses: WitnessSet  # in the top field
    top_certificate: Certificate | None = None  # only with deep verification

    @property
    def field(self) -> MultiquadField:
        return self.witnesses.field

    @property
    def m_lower_bound(self) -> int:
        return len(self.witnesses.elements)

    def to_json(self) -> dict:
        return {
            "base": {"D": self.base_d, "certificate": self.base_certificate.to_json()},
            "steps": [s.to_json() for s in self.steps],
            "field": self.field.to_json(),
            "witnesses": [w.to_json() for w in self.witnesses.elements],
            "top_certificate": (
                self.top_certificate.to_json() if self.top_certificate else None
            ),
            "claim": {
                "m_lower_bound": self.m_lower_bound,
                "established_by": (
                    ["base_certificate", "tower_constraints"]
                    if self.top_certificate is None
                    else ["base_certificate", "tower_constraints", "top_certificate"]
                ),
            },
        }

    @staticmethod
    def from_json(data: Mapping) -> Tower:
        base_cert = Certificate.from_json(data["base"]["certificate"])
        steps = tuple(TowerStep.from_json(s) for s in data["steps"])
        field = MultiquadField.from_json(data["field"])
        witnesses = WitnessSet(
            field,
            tuple(field.element_from_json(w) for w in data["witnesses"]),
            certificate=None,
        )
        top = data.get("top_certificate")
        return Tower(
            base_d=int(data["base"]["D"]),
            base_certificate=base_cert,
            steps=steps,
            witnesses=witnesses,
            top_certificate=Certificate.from_json(top) if top else None,
        )


def build_tower(D: int, N: int, k: int, *, offsets: list[int] | None = None,
                trace_bound: int = DEFAULT_TRACE_BOUND,
                pair_budget: int | None = None,
                deep_verify: bool = False,
                base: WitnessSet | None = None) -> Tower:
    """Compose base search and k-1 extension rounds into a tower of degree 2^k.

    ``offsets`` picks the (offset+1)-th admissible q at each level, so the
    infinite family of admissible towers is enumerable and every output is
    reproducible.  ``base`` short-circuits the quadratic search when a
    certified set is already at hand.
    """
    if k < 1:
        raise ValueError("tower height k must be >= 1")
    offsets = list(offsets) if offsets else []
    offsets += [0] * (k - 1 - len(offsets))
    if len(offsets) > k - 1:
        raise ValueError(f"too many offsets for a k={k} tower")
    kwargs = {} if pair_budget is None else {"pair_budget": pair_budget}
    if base is None:
        try:
            base = search_witnesses(D, N, trace_bound, **kwargs)
        except WitnessNotFoundError as exc:
            raise BaseWitnessNotFoundError(str(exc), budget_limited=exc.budget_limited)
    assert base.certificate is not None
    current = base
    steps = []
    for level in range(k - 1):
        step = select_next_q(current.field, current, offsets[level])
        current = lift_witnesses(step, current)
        steps.append(step)
    top_cert = None
    if deep_verify and k > 1:
        top_cert = certify_witness_set(current, **kwargs)
        current = WitnessSet(current.field, current.elements, top_cert)
    return Tower(
        base_d=D,
        base_certificate=base.certificate,
        steps=tuple(steps),
        witnesses=current,
        top_certificate=top_cert,
    )


def verify_tower(data: Mapping, *, jobs: int = 1) -> list[str]:
    """Replay every machine-checkable claim in a serialized tower bundle.

    Re-derives the base certificate in full, replays all step constraints in
    integer arithmetic, re-checks the lift chain (same coefficients, traces
    doubled per level) and the final claim.  Returns mismatch descriptions.
    """
    from .certifier import verify_certificate  # local import to stay cycle-free

    problems: list[str] = []
    tower = Tower.from_json(data)
    base_problems = verify_certificate(data["base"]["certificate"], jobs=jobs)
    if base_problems:
        # steps build on the base witnesses; a broken base already refutes
        return [f"base: {p}" for p in base_problems]
    base_cert = tower.base_certificate
    if base_cert.field.k != 1 or base_cert.field.radicands[1] != tower.base_d:
        problems.append("base certificate field does not match the recorded D")
    n = len(tower.witnesses.elements)
    if base_cert.conclusion != n:
        problems.append(f"base conclusion {base_cert.conclusion} != witness count {n}")
    primes = base_cert.field.primes
    base_max = max_pair_trace(WitnessSet(base_cert.field, base_cert.witnesses))
    for level, step in enumerate(tower.steps):
        tag = f"step {level}"
        if step.base_primes != primes:
            problems.append(f"{tag}: base primes {step.base_primes} != expected {primes}")
        if not step.constraints_hold():
            problems.append(f"{tag}: constraint log fails integer replay")
        expected_trace = base_max << level  # traces double at every lift
        if step.max_pair_trace != expected_trace:
            problems.append(
                f"{tag}: max pair trace {step.max_pair_trace} != recomputed {expected_trace}"
            )
        primes = primes + (step.chosen_q,)
    if tower.field.primes != primes:
        problems.append(f"top field primes {tower.field.primes} != chain result {primes}")
    if len(base_cert.witnesses) != n:
        problems.append("witness count changed between base and top")
    else:
        for base_w, top_w in zip(base_cert.witnesses, tower.witnesses.elements):
            if dict(base_w.coeffs) != dict(top_w.coeffs):
                problems.append("lifted witness coefficients differ from the base witnesses")
                break
    claim = data.get("claim", {})
    if int(claim.get("m_lower_bound", -1)) != n:
        problems.append("claim does not match the witness count")
    if tower.top_certificate is not None:
        problems += [f"top: {p}" for p in verify_certificate(data["top_certificate"], jobs=jobs)]
        if tuple(tower.top_certificate.witnesses) != tuple(tower.witnesses.elements):
            problems.append("top certificate witnesses differ from the tower witnesses")
    return problems


def check_case_c_bound(c: FieldElement) -> bool:
    """Verify Tr_L(c^2) > sqrt(q) for integral c = u + v*sqrt(q), u, v != 0.

    Property-test harness for the mixed case of the extension argument; not
    part of the certification path.  Comparison is exact on squares.
    """
    field = c.field
    top = 1 << (field.k - 1)
    q = field.radicands[top]
    has_low = any(mask < top and coeff for mask, coeff in c.coeffs.items())
    has_high = any(mask & top and coeff for mask, coeff in c.coeffs.items())
    if not has_low or not has_high:
        raise DegeneratePartError("c = u + v*sqrt(q) needs both u and v nonzero")
    if not is_algebraic_integer(c):
        raise NotIntegralError(f"{c!r} is not an algebraic integer")
    t = (c * c).trace()
    return t > 0 and t * t > q


def split_at_top(c: FieldElement) -> tuple[FieldElement, FieldElement]:
    """Write c = u + v*sqrt(q) with u, v in the subfield below the top generator.

    Both parts are returned as elements of the subfield K.
    """
    field = c.field
    top = 1 << (field.k - 1)
    sub = make_field(list(field.primes[:-1]))
    u: dict[int, Fraction] = {}
    v: dict[int, Fraction] = {}
    for mask, coeff in c.coeffs.items():
        if mask & top:
            # sqrt(p_mask) = sqrt(p_low)*sqrt(q)/m, so the sqrt(q)-part picks up 1/m.
            low = mask ^ top
            v[low] = coeff / field.mult[low][top]
        else:
            u[mask] = coeff
    return sub.element(u), sub.element(v)


def case_b_identity_holds(field_k: MultiquadField, q: int, v: FieldElement) -> bool:
    """Exact check of the squared-pure-part chain for v != 0 in (1/2^(k+1))Z[sqrt(p_I)]:

    Tr_L((v sqrt(q))^2) = 2 q Tr_K(v^2) >= q / 2^(k+1) > sqrt(q).
    """
    if not v:
        raise ValueError("v must be nonzero")
    k = field_k.k
    tr_k_v2 = (v * v).trace()
    lhs = 2 * q * tr_k_v2          # Tr_L(v^2 q) with Tr_L = 2 Tr_K on K
    bound = Fraction(q, 1 << (k + 1))
    return lhs >= bound and bound * bound > q
