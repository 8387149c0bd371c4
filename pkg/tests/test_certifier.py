import json
import random
from fractions import Fraction

import pytest

from conftest import random_tp_integer
from mqf.certifier import (
    Certificate,
    WitnessSet,
    certify_witness_set,
    dumps_canonical,
    enumerate_violations_unpruned,
    pair_condition_certify,
    sqrt_upper,
    verify_certificate,
)
from mqf.cf import search_witnesses
from mqf.errors import (
    BudgetExceededError,
    FieldMismatchError,
    NotIntegralError,
    NotTotallyPositiveError,
)
from mqf.fields import make_field
from mqf.integers import is_algebraic_integer, superset_lattice_box


def test_sqrt_upper_bounds():
    rng = random.Random(61)
    for _ in range(200):
        q = Fraction(rng.randint(0, 500), rng.randint(1, 40))
        u = sqrt_upper(q)
        assert u * u >= q
        assert (u - Fraction(1, q.denominator)) ** 2 < q or u == 0


# ---------------------------------------------------------------------------
# single pairs
# ---------------------------------------------------------------------------

def test_pair_one_one_fails_with_c_one(q2):
    v = pair_condition_certify(q2.one(), q2.one())
    assert not v.holds
    assert v.violating_c == q2.one()
    assert v.points_scanned > 0
    # soundness re-check of the reported violation
    c = v.violating_c
    diff = 4 * q2.one() * q2.one() - c * c
    assert all(diff.sign_at(s) >= 0 for s in range(q2.degree))
    assert is_algebraic_integer(c) and c != q2.zero()


def test_zero_bounds_box_is_vacuous(q2):
    # with embedding bounds 0 the box holds only the origin, so a scan that
    # skips zero sees no candidate at all
    box = superset_lattice_box(q2, [0, 0])
    assert box.total_points() == 1


def test_pair_from_search_holds_and_matches_unpruned():
    ws = search_witnesses(15, 2, trace_bound=60)
    a, b = ws.elements
    verdict, allv = pair_condition_certify(a, b, collect_all=True)
    assert verdict.holds and not allv
    unpruned, _ = enumerate_violations_unpruned(a, b)
    assert unpruned == []


def test_pruned_equals_unpruned_on_random_pairs():
    rng = random.Random(62)
    fields = [make_field([d]) for d in (2, 5, 13, 19)]
    checked = 0
    for _ in range(40):
        field = rng.choice(fields)
        a = random_tp_integer(field, rng, spread=2)
        b = random_tp_integer(field, rng, spread=2)
        verdict, pruned = pair_condition_certify(a, b, collect_all=True)
        unpruned, near = enumerate_violations_unpruned(a, b)
        assert set(pruned) == set(unpruned)
        assert verdict.holds == (not unpruned)
        assert verdict.near_misses == near
        checked += 1
    assert checked == 40


def test_ellipsoid_pruning_is_valid(q2, q23):
    # succeq(4ab, c^2) implies Tr(c^2) <= 4 Tr(ab); sample the implication
    rng = random.Random(63)
    for field in (q2, q23):
        for _ in range(100):
            a = random_tp_integer(field, rng, spread=2)
            b = random_tp_integer(field, rng, spread=2)
            fourab = 4 * a * b
            c = field.element({m: rng.randint(-3, 3) for m in range(field.degree)})
            if (fourab - c * c).succeq(0):
                assert (c * c).trace() <= fourab.trace()


def test_unit_scaling_preserves_verdict(q2):
    unit = q2.rational(3) + 2 * q2.sqrt_term(2)  # 3 + 2 sqrt2 = (1 + sqrt2)^2
    assert unit.norm() == 1 and unit.is_totally_positive()
    rng = random.Random(64)
    for _ in range(6):
        a = random_tp_integer(q2, rng, spread=2)
        b = random_tp_integer(q2, rng, spread=2)
        before = pair_condition_certify(a, b).holds
        after = pair_condition_certify(unit * a, unit * b).holds
        assert before == after


def test_pair_requires_valid_inputs(q2, q23):
    with pytest.raises(FieldMismatchError):
        pair_condition_certify(q2.one(), q23.one())
    with pytest.raises(NotTotallyPositiveError):
        pair_condition_certify(q2.one() + q2.sqrt_term(2), q2.one())
    with pytest.raises(NotIntegralError):
        pair_condition_certify(q2.rational(Fraction(1, 2)), q2.one())


def test_pair_budget_exceeded(q2):
    big = q2.rational(50) + q2.sqrt_term(2)
    with pytest.raises(BudgetExceededError) as info:
        pair_condition_certify(big, big, budget=100)
    assert info.value.points_scanned == 100
    assert info.value.points_required > 100


def test_budget_still_reports_found_violation(q2):
    # a violation inside the budget is a complete verdict even if the box
    # is larger than the budget
    big = q2.rational(50) + q2.sqrt_term(2)
    v = pair_condition_certify(big, big, budget=3 * 10**5)
    assert not v.holds
    assert v.violating_c is not None


# ---------------------------------------------------------------------------
# whole witness sets and certificates
# ---------------------------------------------------------------------------

def test_certify_singleton_vacuous(q2):
    cert = certify_witness_set([q2.one()])
    assert cert.pairs == ()
    assert cert.conclusion == 1
    assert cert.all_hold


def test_certify_rejects_non_integral(q2):
    with pytest.raises(NotIntegralError):
        certify_witness_set([q2.one(), q2.rational(Fraction(1, 2))])


def test_certify_failing_set_has_no_conclusion(q2):
    cert = certify_witness_set([q2.one(), q2.rational(2)])
    assert not cert.all_hold
    assert cert.conclusion is None
    assert cert.pairs[0].violating_c is not None


def test_parallel_jobs_match_serial():
    ws = search_witnesses(15, 2, trace_bound=60)
    serial = certify_witness_set(ws)
    parallel = certify_witness_set(ws, jobs=2)
    assert serial.to_json() == parallel.to_json()


def test_certificate_json_roundtrip():
    ws = search_witnesses(15, 2, trace_bound=60)
    cert = ws.certificate
    data = json.loads(dumps_canonical(cert.to_json()))
    back = Certificate.from_json(data)
    assert back.to_json() == cert.to_json()
    assert data["pair_condition"] == "i<j"
    assert data["lattice"] == {"kind": "superset", "denominator": 2}
    assert data["conclusion"] == {"m_lower_bound": 2}


def test_verify_certificate_clean():
    ws = search_witnesses(15, 2, trace_bound=60)
    assert verify_certificate(ws.certificate.to_json()) == []


@pytest.mark.parametrize("tamper", [
    "witness_coeff", "holds_flip", "drop_pair", "conclusion_bump", "scanned_edit",
])
def test_verify_detects_tampering(tamper):
    ws = search_witnesses(15, 2, trace_bound=60)
    data = json.loads(dumps_canonical(ws.certificate.to_json()))
    if tamper == "witness_coeff":
        key = sorted(data["witnesses"][1]["coeffs"])[0]
        data["witnesses"][1]["coeffs"][key] = "17/1"
    elif tamper == "holds_flip":
        data["pairs"][0]["holds"] = False
        data["pairs"][0]["c"] = data["witnesses"][0]
    elif tamper == "drop_pair":
        data["pairs"] = []
    elif tamper == "conclusion_bump":
        data["conclusion"] = {"m_lower_bound": 5}
    elif tamper == "scanned_edit":
        data["pairs"][0]["scanned"] += 1
    assert verify_certificate(data) != []


def test_verify_tamper_to_invalid_witness_reports_not_crashes():
    # a coefficient edit that breaks total positivity must still be a
    # verification failure, not an error
    ws = search_witnesses(15, 2, trace_bound=60)
    data = json.loads(dumps_canonical(ws.certificate.to_json()))
    key = sorted(data["witnesses"][1]["coeffs"])[0]
    data["witnesses"][1]["coeffs"][key] = "-5/1"
    problems = verify_certificate(data)
    assert problems and "witness invalid" in problems[0]


def test_certificates_verify_across_kernel_backends(monkeypatch):
    # a certificate produced under one backend must re-verify under the other:
    # point counts are backend-independent and all content is exact
    ws = search_witnesses(15, 2, trace_bound=60)
    data = ws.certificate.to_json()
    monkeypatch.setenv("MQF_JIT", "0")
    assert verify_certificate(data) == []
    monkeypatch.setenv("MQF_JIT", "1")
    assert verify_certificate(data) == []
