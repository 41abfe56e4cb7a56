from fractions import Fraction

import pytest

from errors import HypothesisViolation, OutOfRange, RangeEmpty, SizeLimitExceeded
from koszul_engine import KoszulEngine
from multigrade import Setting
from witness_engine import (
    build_fqkb, build_tilde_f, construct_witness, extend_witness, find_witness, fqkb_case, floor_lemma_target,
    key_case_anchor, key_case_guards, key_case_setting, l_set, linear_annihilator_variables, per_k_range, range_report,
    restrict_witness, rho_lower_bound, rho_lower_bound_min, theorem_a_range, thm_c_guards, tilde_f_relations,
    verify_witness, z_set,
)


# ------------------------------------------------------------------
#  f̃
# ------------------------------------------------------------------
def test_tilde_f_values():
    s = Setting(3, 3)
    assert build_tilde_f(s, 5, 2).text() == "x2*x3*y0^2*y1"
    assert build_tilde_f(s, 2, 1).text() == "x1*y0"
    assert build_tilde_f(s, 3, 0).text() == "y0^3"
    assert build_tilde_f(s, 3, 3).text() == "x0^3"
    assert build_tilde_f(s, 0, 0).is_one()


def test_tilde_f_bidegree_and_index():
    s = Setting(3, 3)
    for q in range(1, 6):
        for k in range(max(0, q - 3), min(q, 3) + 1):
            f = build_tilde_f(s, q, k)
            assert f.bidegree == (k, q - k)
            assert s.index_degree(f) == k * (q - k)


def test_tilde_f_outside_range():
    with pytest.raises(OutOfRange):
        build_tilde_f(Setting(1, 1), 3, 1)


def test_tilde_f_relations_hold():
    assert all(tilde_f_relations(Setting(2, 2), 2, 1).values())


# ------------------------------------------------------------------
#  f_{q,k,b}
# ------------------------------------------------------------------
def test_fqkb_case_one(cubic):
    assert fqkb_case(cubic, 2, 1) == 1
    f = build_fqkb(cubic, 2, 1)
    assert f.text() == "x0^2*x1^4*y0^5*y1"
    assert cubic.index_degree(f) == 15
    assert build_fqkb(cubic, 1, 0).text() == "x0^2*x1*y0^3"
    assert build_fqkb(cubic, 1, 1).text() == "x0^3*y0^2*y1"


def test_floor_lemma(cubic):
    f = build_fqkb(cubic, 2, 1)
    assert cubic.dth_root(f / cubic.remd(f)) == floor_lemma_target(cubic, 2, 1)


def test_fqkb_case_two():
    s = Setting(1, 1, 3, 3, -2, 0)
    assert fqkb_case(s, 1, 1) == 2
    assert floor_lemma_target(s, 1, 1).is_one()
    assert build_fqkb(s, 1, 1).text() == "x0*y0^2*y1"
    assert linear_annihilator_variables(s, 1, 1) == []


def test_fqkb_hypotheses():
    with pytest.raises(HypothesisViolation):
        fqkb_case(Setting(1, 1), 1, 0)
    with pytest.raises(OutOfRange):
        fqkb_case(Setting(1, 1, 3, 3), 0, 0)


def test_annihilator_variables(cubic):
    assert linear_annihilator_variables(cubic, 2, 1) == [("x", 0), ("y", 0)]


def test_l_and_z_sets(cubic):
    f = build_fqkb(cubic, 1, 0)
    L, Z = l_set(cubic, f), z_set(cubic, f)
    assert {m.text() for m in L} == {"x0^2*x1*y0^3", "x0^3*y0^2*y1"}
    assert len(Z) == 12
    assert set(L) <= set(Z)


# ------------------------------------------------------------------
#  Ranges
# ------------------------------------------------------------------
def test_theorem_a_range(cubic):
    assert theorem_a_range(cubic, 1) == (1, 8)
    assert theorem_a_range(cubic, 2) == (12, 11)
    assert theorem_a_range(cubic, 3) is None


def test_per_k_range_and_anchor(cubic):
    assert per_k_range(cubic, 2, 1) == (12, 11)
    assert key_case_anchor(cubic, 2, 1) == 12
    assert per_k_range(Setting(1, 1, 4, 3), 2, 1) == (16, 15)


def test_rho_bounds(cubic):
    assert rho_lower_bound(cubic, 1) == Fraction(-1, 15)
    assert rho_lower_bound(cubic, 2) == Fraction(-1, 15)
    assert rho_lower_bound_min(cubic, 1) == Fraction(7, 15)


def test_guards():
    assert thm_c_guards(Setting(1, 1, 3, 3), 1) == []
    failed = thm_c_guards(Setting(1, 1, 2, 2), 2)
    assert len(failed) == 2
    with pytest.raises(HypothesisViolation):
        theorem_a_range(Setting(1, 1, 2, 2), 2)


def test_range_report(cubic):
    ok = range_report(cubic, 1)
    assert ok.status == "ok" and (ok.lo, ok.hi) == (1, 8)
    assert set(ok.per_k) == {0, 1}
    assert ok.to_dict()["rhoLowerMin"] == "7/15"

    assert range_report(cubic, 2).status == "empty"
    assert range_report(cubic, 3).status == "skipped-hypothesis"
    assert range_report(Setting(1, 1, 1, 1, 0, 2), 1).status == "skipped-hypothesis"


def test_key_case_setting():
    assert key_case_setting(Setting(2, 3, 3, 3), 2, 1).n == (1, 1)


def test_anchor_uses_its_own_hypotheses():
    s = Setting(1, 2, 3, 3)
    assert thm_c_guards(s, 3)
    assert key_case_guards(s, 3, 2) == []
    assert key_case_anchor(s, 3, 2) == 35
    w = construct_witness(s, 3, 2, 35, route="lifted")
    assert w.p == 35 and w.route == "lifted"
    with pytest.raises(HypothesisViolation):
        construct_witness(s, 3, 2, 34, route="lifted")


def test_anchor_guards_fail_outside_key_case_hypotheses():
    assert key_case_guards(Setting(1, 1, 2, 2), 2, 1) == []
    assert len(key_case_guards(Setting(1, 1, 1, 1), 2, 1)) == 2


# ------------------------------------------------------------------
#  Witnesses
# ------------------------------------------------------------------
@pytest.mark.parametrize("q,k,p,route", [(1, 0, 1, "lifted"), (1, 0, 2, "annihilator")])
def test_first_row_witnesses(cubic, cubic_engine, q, k, p, route):
    w = construct_witness(cubic, q, k, p)
    assert w.route == route and w.p == p
    assert verify_witness(w, cubic_engine) == {"nonzero": True, "cocycle": True, "coboundary": False}
    assert w.is_valid


@pytest.mark.parametrize("p,route", [(12, "lifted"), (13, "annihilator")])
def test_second_row_witnesses(cubic, cubic_engine, p, route):
    w = find_witness(cubic, 2, 1, p, cubic_engine)
    assert w.route == route
    assert w.is_valid
    assert w.to_dict()["payload"] == "x0^2*x1^4*y0^5*y1"


def test_no_witness_below_range(cubic):
    with pytest.raises(RangeEmpty):
        construct_witness(cubic, 2, 1, 5)


def test_annihilator_route_has_its_own_range(cubic):
    assert per_k_range(cubic, 2, 1) == (12, 11)
    w = construct_witness(cubic, 2, 1, 13, route="annihilator")
    assert w.route == "annihilator" and w.p == 13
    with pytest.raises(RangeEmpty):
        construct_witness(cubic, 1, 0, 13, route="annihilator")


def test_verification_only_searches_the_witness_block(cubic):
    engine = KoszulEngine(cubic, size_limit=100)
    with pytest.raises(SizeLimitExceeded):
        engine.check_size(2, 1)
    w = construct_witness(cubic, 1, 0, 2)
    assert verify_witness(w, engine) == {"nonzero": True, "cocycle": True, "coboundary": False}


@pytest.mark.slow
@pytest.mark.parametrize("p", [15, 16])
def test_witnesses_for_d43(p):
    assert find_witness(Setting(1, 1, 4, 3), 2, 1, p).is_valid


@pytest.mark.slow
def test_restricted_witness_stays_valid():
    w = construct_witness(Setting(1, 2, 3, 3), 2, 1, 12, route="lifted")
    small = restrict_witness(w, 0, 1)
    assert small.setting.n == (1, 1)
    assert small.route == "restricted"
    verify_witness(small)
    assert small.is_valid


def test_extend_witness(cubic):
    w = construct_witness(cubic, 1, 0, 1, route="lifted")
    with pytest.raises(RangeEmpty):
        extend_witness(w, w.factors[0])
    extra = next(m for m in l_set(cubic, w.payload) if m not in w.factors)
    bigger = extend_witness(w, extra)
    assert bigger.p == 2 and bigger.route == "extended"
    assert set(bigger.factors) == set(w.factors) | {extra}
    verify_witness(bigger)
    assert bigger.is_valid
