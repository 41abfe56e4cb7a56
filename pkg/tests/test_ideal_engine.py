import pytest

from errors import NotHomogeneous, NotModularHomogeneous
from ideal_engine import (
    IdealEngine, Polynomial, corrupted_forms, regular_sequence_forms, vanishing_clauses,
)
from multigrade import Setting


def _terms(poly: Polynomial) -> set[str]:
    return {m.text() for m in poly.terms}


def test_forms_for_n11(cubic):
    forms = regular_sequence_forms(cubic)
    assert len(forms) == 3
    assert _terms(forms[0]) == {"x0^3*y0^3"}
    assert _terms(forms[1]) == {"x0^3*y1^3", "x1^3*y0^3"}
    assert _terms(forms[2]) == {"x1^3*y1^3"}


def test_g3_for_n24():
    s = Setting(2, 4, 2, 3)
    forms = regular_sequence_forms(s)
    assert len(forms) == 7
    assert _terms(forms[3]) == {"x2^2*y1^3", "x1^2*y2^3", "x0^2*y3^3"}


@pytest.mark.parametrize("n1,n2,d1,d2", [(1, 1, 1, 1), (1, 2, 2, 1), (2, 2, 2, 2), (1, 3, 3, 1)])
def test_forms_are_homogeneous(n1, n2, d1, d2):
    s = Setting(n1, n2, d1, d2)
    for t, g in enumerate(regular_sequence_forms(s)):
        assert g.bidegree == s.d
        assert {s.index_degree(m) for m in g.terms} == {d1 * d2 * t}
        assert {s.modular_degree(m) for m in g.terms} == {s.modular_degree(s.one())}


@pytest.mark.parametrize("n1,n2,d1,d2", [(1, 1, 1, 1), (1, 2, 2, 1), (2, 2, 2, 2)])
def test_hilbert_function_in_degree_d(n1, n2, d1, d2):
    s = Setting(n1, n2, d1, d2)
    assert IdealEngine.for_setting(s).hilbert_function(s.d) == n1 + n2 + 1


def test_ideal_empty_below_d():
    engine = IdealEngine.for_setting(Setting(1, 1, 2, 2))
    assert engine.hilbert_function((1, 2)) == 0


def test_quadric_quotient_dims(quadric):
    engine = IdealEngine.for_setting(quadric)
    assert [engine.quotient_piece_dim((a, a)) for a in range(4)] == [1, 1, 0, 0]
    assert engine.quotient_piece_dim((1, 1), 1) == 1
    assert engine.quotient_piece_dim((1, 1), 0) == 0
    assert engine.quotient_piece_dim((-1, 1)) == 0


def test_quotient_basis_reduces_ideal_to_zero(cubic):
    engine = IdealEngine.for_setting(cubic)
    piece = engine.ideal_piece((4, 4))
    assert piece.dim == len(piece.ambient) - piece.ideal_dim
    for g in regular_sequence_forms(cubic):
        assert not piece.normal_form(g * cubic.parse("x0*y1"), engine.fld)


def test_brute_force_membership():
    s = Setting(2, 2)
    engine = IdealEngine.for_setting(s)
    assert engine.is_in_ideal_brute_force(regular_sequence_forms(s)[0])
    for ell in range(s.n1 + 1):
        assert engine.is_in_ideal_brute_force(s.x(ell) * s.y(0, ell + 1))
    assert not engine.is_in_ideal_brute_force(s.x(0))


def test_brute_force_needs_homogeneous(quadric):
    mixed = Polynomial({quadric.x(0): 1, quadric.y(0): 1})
    with pytest.raises(NotHomogeneous):
        IdealEngine.for_setting(quadric).is_in_ideal_brute_force(mixed)


def test_modular_path(cubic):
    engine = IdealEngine.for_setting(cubic)
    m = cubic.parse("x0^6*y0^3")
    assert engine.is_in_ideal_modular_path(m) and engine.is_in_ideal_brute_force(m)
    f = cubic.parse("x0^2*x1^4*y0^5*y1")
    assert not engine.is_in_ideal_modular_path(f) and not engine.is_in_ideal_brute_force(f)


def test_modular_path_needs_one_modular_degree(cubic):
    f = Polynomial({cubic.parse("x0^3*y0^3"): 1, cubic.parse("x0^2*x1*y0^3"): 1})
    with pytest.raises(NotModularHomogeneous):
        IdealEngine.for_setting(cubic).is_in_ideal_modular_path(f)


@pytest.mark.parametrize("d", [(2, 2), (3, 2)])
def test_membership_oracles_agree_on_all_small_monomials(d):
    s = Setting(1, 1, *d)
    engine = IdealEngine.for_setting(s)
    for a in [(d[0], d[1]), (2 * d[0], d[1] + 1), (d[0] + 2, 2 * d[1])]:
        for m in s.monomials(a):
            assert engine.is_in_ideal_modular_path(m) == engine.is_in_ideal_brute_force(m), m.text()


def test_restriction_image_of_g2():
    s = Setting(2, 4, 2, 3)
    restriction = IdealEngine.for_setting(s).restrict_to_subproduct(1, 0)
    assert restriction.target.n == (1, 4)
    assert _terms(restriction.forms[2]) == {"x0^2*y2^3", "x1^2*y1^3"}


@pytest.mark.parametrize("i,j", [(0, 0), (1, 0), (0, 2), (1, 3)])
def test_restriction_forms_are_the_smaller_forms(i, j):
    s = Setting(2, 4, 2, 3)
    restriction = IdealEngine.for_setting(s).restrict_to_subproduct(i, j)
    assert list(restriction.forms) == regular_sequence_forms(s.restricted(i, j))


def test_dropping_variables_matches_smaller_ring():
    s = Setting(2, 2)
    dropped = IdealEngine.for_setting(s).modulo_last_variables(1, 0)
    smaller = IdealEngine.for_setting(s.restricted(1, 0))
    for a in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        assert dropped.quotient_piece_dim(a) == smaller.quotient_piece_dim(a)


def test_partial_ideal_dim(quadric):
    engine = IdealEngine.for_setting(quadric)
    assert engine.partial_ideal_dim((2, 2), 0) == 0
    assert engine.partial_ideal_dim((2, 2), 1) == quadric.piece_dim((1, 1))
    assert engine.partial_ideal_dim((2, 2), 3) == engine.hilbert_function((2, 2))


def test_free_engine_has_no_ideal(quadric):
    free = IdealEngine.free(quadric)
    assert free.quotient_piece_dim((1, 1)) == 4
    assert free.tag == "free"


def test_registry_returns_one_engine_per_setting(quadric):
    assert IdealEngine.for_setting(quadric) is IdealEngine.for_setting(Setting(1, 1))
    assert IdealEngine.free(quadric) is not IdealEngine.for_setting(quadric)


def test_corrupted_forms(cubic):
    forms = corrupted_forms(cubic)
    assert _terms(forms[1]) == {"x0^3*y1^3"}
    assert IdealEngine.corrupted(cubic).tag == "corrupt"
    assert not IdealEngine.corrupted(cubic).use_disk_cache


def test_tri_degree_vanishing_examples(quadric):
    engine = IdealEngine.for_setting(quadric)
    assert all(engine.quotient_piece_dim((1, 2), k) == 0 for k in range(4))
    assert 1 in vanishing_clauses(1, 1, (1, 2), 0)
    s = Setting(2, 3)
    engine = IdealEngine.for_setting(s)
    assert engine.quotient_piece_dim((2, 2), 4) == 1
    assert all(engine.quotient_piece_dim((2, 2), k) == 0 for k in range(4))


def test_vanishing_clauses():
    assert vanishing_clauses(2, 2, (1, 1), 0) == {3}
    assert vanishing_clauses(2, 2, (1, 1), 1) == set()
    assert 4 in vanishing_clauses(2, 2, (1, 1), 4)
    assert vanishing_clauses(1, 1, (3, 1), 5) >= {2}
