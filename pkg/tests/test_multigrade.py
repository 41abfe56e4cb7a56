import pytest

from errors import ConfigError, NotInSubring, OutOfRange
from multigrade import Monomial, Setting, binom, product_cohomology, projective_space_cohomology


def test_text_and_parse_agree(cubic):
    m = cubic.parse("x0^2*x1^4*y0^5*y1")
    assert m.xexp == (2, 4) and m.yexp == (5, 1)
    assert m.text() == "x0^2*x1^4*y0^5*y1"
    assert cubic.parse("1").is_one()


@pytest.mark.parametrize("text", ["z0", "x2", "x0^", "x0**2"])
def test_parse_rejects_bad_text(quadric, text):
    with pytest.raises(ConfigError):
        quadric.parse(text)


def test_negative_exponent_rejected():
    with pytest.raises(ConfigError):
        Monomial((1, -1), (0, 0))


def test_gradings(cubic):
    m = cubic.parse("x0^2*x1^4*y0^5*y1")
    assert m.bidegree == (6, 6)
    assert cubic.index_degree(m) == 15
    res = cubic.modular_degree(m)
    assert (res.xres, res.yres) == ((2, 1), (2, 1))
    assert cubic.remd(m).text() == "x0^2*x1*y0^2*y1"
    assert cubic.dth_root(m / cubic.remd(m)).text() == "x1*y0"


def test_dth_root_and_power(cubic):
    m = cubic.parse("x1*y0^2")
    assert cubic.dth_root(cubic.dth_power(m)) == m
    with pytest.raises(NotInSubring):
        cubic.dth_root(cubic.parse("x0^2*y0^3"))


def test_arithmetic(quadric):
    a, b = quadric.parse("x0*y1"), quadric.parse("x0^2*y1^3")
    assert a.divides(b)
    assert (b / a).text() == "x0*y1^2"
    assert (a * a).text() == "x0^2*y1^2"
    assert not b.divides(a)
    assert a.uses("y", 1) and not a.uses("x", 1)
    with pytest.raises(ValueError):
        a / b


def test_enumeration_order_is_grevlex(quadric):
    assert [m.text() for m in quadric.monomials((1, 1))] == ["x0*y0", "x1*y0", "x0*y1", "x1*y1"]


def test_enumeration_with_index_filter(quadric):
    assert [m.text() for m in quadric.monomials((1, 1), 1)] == ["x1*y0", "x0*y1"]
    assert quadric.monomials((-1, 2)) == ()


@pytest.mark.parametrize("n1,n2,a", [(1, 1, (2, 1)), (1, 2, (2, 2)), (2, 3, (1, 3))])
def test_piece_dim_matches_enumeration(n1, n2, a):
    s = Setting(n1, n2)
    assert len(s.monomials(a)) == s.piece_dim(a)


def test_r_nd():
    assert Setting(1, 1).r_nd == 3
    assert Setting(1, 1, 3, 3).r_nd == 15
    assert Setting(1, 2, 3, 3).r_nd == 39


@pytest.mark.parametrize("kwargs", [dict(d1=0, d2=2), dict(n1=0, n2=1), dict(char=4)])
def test_setting_invariants(kwargs):
    base = dict(n1=1, n2=1)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        Setting(**base)


def test_char_zero_is_allowed():
    assert Setting(1, 1, char=0).char == 0


def test_restricted():
    s = Setting(2, 4, 3, 2)
    small = s.restricted(1, 0)
    assert small.n == (1, 4) and small.d == (3, 2)
    with pytest.raises(OutOfRange):
        Setting(1, 1).restricted(1, 0)


def test_variable_out_of_range(quadric):
    with pytest.raises(OutOfRange):
        quadric.x(2)


def test_binom_outside_range_is_zero():
    assert binom(3, 4) == 0 and binom(3, -1) == 0 and binom(4, 2) == 6


def test_projective_space_cohomology():
    assert projective_space_cohomology(1, 2) == {0: 3}
    assert projective_space_cohomology(2, -1) == {}
    assert projective_space_cohomology(2, -4) == {2: 3}


def test_product_cohomology():
    assert product_cohomology(1, 1, -2, -2) == {2: 1}
    assert product_cohomology(1, 1, 1, -2) == {1: 2}
    assert product_cohomology(1, 1, -1, 0) == {}


def test_product_cohomology_only_in_four_degrees():
    n1, n2 = 1, 2
    for a1 in range(-5, 5):
        for a2 in range(-5, 5):
            assert set(product_cohomology(n1, n2, a1, a2)) <= {0, n1, n2, n1 + n2}
