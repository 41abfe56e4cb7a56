from dataclasses import replace

import pytest

import koszul_engine
from config import CONFIG
from health_check import (
    HealthCheck, VerificationRecord, check_annihilators, check_artinian_equivalence, check_euler_characteristic,
    check_membership, check_quadric, check_range, check_regularity, check_restriction, check_tilde_f,
    check_tri_degree_vanishing, check_witnesses, instance_id, regseq_check, regseq_kernels, scan_conjecture,
)
from multigrade import Setting


def test_health_check_report():
    report = HealthCheck().run()
    assert set(report.details) == {"memory", "disk", "cache_dir"}
    assert isinstance(report.passed, bool)
    assert report.details["cache_dir"] == "OK"


def test_record_status_is_validated():
    with pytest.raises(ValueError):
        VerificationRecord("n=1,1", "quadric", "maybe")


def test_conjectural_failures_do_not_gate():
    assert VerificationRecord("i", "c", "fail").failed
    assert not VerificationRecord("i", "c", "fail", conjectural=True).failed
    assert not VerificationRecord("i", "c", "skipped-size").failed


def test_instance_id():
    assert instance_id(Setting(1, 1)) == "n=1,1 d=1,1 b=0,0"
    assert instance_id(Setting(1, 1, char=0)) == "n=1,1 d=1,1 b=0,0 char=0"
    assert instance_id(Setting(1, 1, 3, 3), q=1, k=0) == "n=1,1 d=3,3 b=0,0 q=1 k=0"


# ------------------------------------------------------------------
#  Betti claims and the negative control
# ------------------------------------------------------------------
def test_quadric_claim(quadric):
    assert check_quadric(quadric).status == "pass"


def test_quadric_claim_catches_corruption(quadric):
    record = check_quadric(quadric, corrupt=True)
    assert record.status == "fail" and record.failed
    assert "artinian" in record.details


def test_artinian_equivalence(quadric):
    assert check_artinian_equivalence(quadric).status == "pass"
    assert check_artinian_equivalence(quadric, corrupt=True).status == "fail"


def test_artinian_equivalence_non_cm_is_skipped():
    assert check_artinian_equivalence(Setting(1, 1, 1, 1, 0, 2)).status == "skipped-hypothesis"


def test_euler(quadric):
    assert check_euler_characteristic(quadric).status == "pass"


# ------------------------------------------------------------------
#  Ranges
# ------------------------------------------------------------------
def test_empty_range_passes(cubic):
    records = check_range(cubic, 2)
    assert [r.claim for r in records] == ["thmA", "rho-bound"]
    assert all(r.status == "pass" for r in records)


def test_range_outside_hypotheses_is_skipped():
    records = check_range(Setting(1, 1, 2, 2), 2)
    assert {r.status for r in records} == {"skipped-hypothesis"}


@pytest.mark.slow
def test_first_row_range(cubic):
    thm_a, rho = check_range(cubic, 1)
    assert thm_a.status == "pass", thm_a.details
    assert rho.status == "pass", rho.details


def test_range_cells_over_the_limit_are_certified_by_witnesses(cubic, monkeypatch):
    strand = replace(CONFIG.strand, ENUMERATION_LIMIT=2_000)
    monkeypatch.setattr(koszul_engine, "CONFIG", replace(CONFIG, strand=strand))
    thm_a, rho = check_range(cubic, 1)
    assert thm_a.status == "pass", thm_a.details
    assert "6 by witness" in thm_a.details
    assert rho.status == "pass", rho.details


# ------------------------------------------------------------------
#  Tri-degree scan
# ------------------------------------------------------------------
@pytest.mark.parametrize("n1,n2", [(1, 1), (1, 2), (2, 2)])
def test_tri_degree_vanishing(n1, n2):
    assert check_tri_degree_vanishing(n1, n2).status == "pass"


def test_scan_conjecture_flags():
    records = scan_conjecture(1, 2)
    assert [r.claim for r in records] == ["tridegvanish", "conj-4", "conj-iff"]
    assert [r.conjectural for r in records] == [False, True, True]
    assert records[0].status == "pass"
    assert not any(r.failed for r in records[1:])


# ------------------------------------------------------------------
#  Membership, regular sequence, regularity
# ------------------------------------------------------------------
def test_membership_oracles():
    record = check_membership(Setting(1, 1, 2, 2), samples=30, seed=1)
    assert record.status == "pass"
    assert "30 samples" in record.details


def test_regseq_on_cohen_macaulay(quadric):
    assert regseq_kernels(quadric) == []
    record = regseq_check(quadric)
    assert record.status == "pass" and "injective" in record.details


def test_regseq_outside_cohen_macaulay_range():
    record = regseq_check(Setting(1, 1, 1, 1, 0, 2), bound=3)
    assert record.status == "pass"
    assert record.details.startswith("not CM")


@pytest.mark.parametrize("setting", [Setting(1, 1), Setting(1, 2, 2, 1), Setting(1, 1, 1, 1, 0, 2)])
def test_regularity(setting):
    assert check_regularity(setting).status == "pass"


# ------------------------------------------------------------------
#  Witness claims
# ------------------------------------------------------------------
def test_annihilators_in_key_case(cubic):
    record = check_annihilators(cubic, 2, 1)
    assert record.status == "pass", record.details
    assert "δ=12" in record.details


def test_annihilators_off_key_case(cubic):
    record = check_annihilators(cubic, 1, 0)
    assert record.status == "pass", record.details
    assert "δ=" not in record.details


def test_witness_claims(cubic):
    first = check_witnesses(cubic, 1, 0)
    assert first.claim == "witness" and first.status == "pass", first.details
    special = check_witnesses(cubic, 2, 1)
    assert special.claim == "thm-special" and special.status == "pass", special.details


@pytest.mark.slow
def test_anchor_witness_beyond_range_hypotheses():
    record = check_witnesses(Setting(1, 2, 3, 3), 3, 2)
    assert record.claim == "thm-special"
    assert record.status == "pass", record.details
    assert "p=35 [lifted]" in record.details


@pytest.mark.slow
def test_anchor_witness_lifts_from_key_case():
    record = check_restriction(Setting(1, 2, 3, 3), 2, 1)
    assert record.claim == "lem-lift"
    assert record.status == "pass", record.details
    assert "restricts to" in record.details and "valid at p=13" in record.details


def test_restriction_needs_a_larger_product(cubic):
    assert check_restriction(cubic, 2, 1).status == "skipped-hypothesis"


def test_tilde_f_claim():
    assert check_tilde_f(2, 2, 4).status == "pass"
