from dataclasses import replace
from fractions import Fraction

import pytest

import koszul_engine
from config import CONFIG
from errors import ConfigError, HypothesisViolation, SizeLimitExceeded
from koszul_engine import (
    KoszulEngine, WedgeBasis, is_cohen_macaulay, kunneth_regularity_vanishing, regularity_vanishing_holds,
    rho_q, sort_with_sign,
)
from multigrade import Setting


def test_wedge_rank_and_unrank(quadric):
    wedge = WedgeBasis(quadric.monomials((1, 1)), 2)
    assert len(wedge) == 6
    for index, subset in enumerate(wedge):
        assert wedge.rank(subset) == index
        assert wedge.unrank(index) == subset


def test_sort_with_sign():
    assert sort_with_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert sort_with_sign((1, 0)) == ((0, 1), -1)
    assert sort_with_sign((0, 0))[1] == 0


def test_cohen_macaulay_gate():
    bad = Setting(1, 1, 1, 1, 0, 2)
    assert not is_cohen_macaulay(bad)
    assert is_cohen_macaulay(Setting(1, 1, 3, 3))
    with pytest.raises(HypothesisViolation):
        KoszulEngine(bad, "artinian")
    KoszulEngine(bad, "raw")


def test_unknown_mode(quadric):
    with pytest.raises(ConfigError):
        KoszulEngine(quadric, "bogus")


@pytest.mark.parametrize("mode", ["artinian", "raw"])
def test_quadric_table(quadric, mode):
    table = KoszulEngine(quadric, mode).betti_table()
    assert table.nonzero() == {(0, 0): 1, (1, 1): 1}
    assert not table.skipped


def test_quadric_generators_and_rho(quadric):
    engine = KoszulEngine(quadric)
    assert engine.N == 1
    table = engine.betti_table((0, 3), [0, 1])
    assert rho_q(table, 1) == Fraction(1, 3)


def test_table_rendering(quadric):
    table = KoszulEngine(quadric).betti_table((0, 3), [0, 1])
    lines = str(table).splitlines()
    assert lines[1] == "total: 1 1 0 0"
    assert lines[2] == "    0: 1 . . ."
    assert lines[3] == "    1: . 1 . ."


def test_table_to_dict(quadric):
    data = KoszulEngine(quadric).betti_table((0, 1), [0]).to_dict()
    assert data["mode"] == "artinian" and data["r"] == 3
    assert data["entries"] == [{"p": 0, "q": 0, "dim": 1}, {"p": 1, "q": 0, "dim": 0}]
    assert "skipped" not in data


def test_d22_second_row():
    engine = KoszulEngine(Setting(1, 1, 2, 2))
    assert engine.N == 6
    table = engine.betti_table((0, 6), [2])
    assert table.nonzero() == {(6, 2): 1}


def test_blocked_rank_matches_full_strand():
    engine = KoszulEngine(Setting(1, 1, 2, 1))
    for p in range(4):
        for q in range(3):
            assert engine.kpq_dim(p, q) == engine.build_strand(p, q).cohomology_dim(), (p, q)


def test_artinian_matches_raw():
    s = Setting(1, 1, 2, 1)
    artinian = KoszulEngine(s, "artinian").betti_table((0, 3), [0, 1, 2])
    raw = KoszulEngine(s, "raw").betti_table((0, 3), [0, 1, 2])
    assert artinian.entries == raw.entries


def test_size_limit_marks_cells_skipped():
    table = KoszulEngine(Setting(1, 1, 2, 2), size_limit=1).betti_table((0, 3), [1])
    assert table.skipped
    assert not table.row_complete(1)
    assert "?" in str(table)


def test_block_search_matches_enumeration():
    for mode in ("artinian", "raw"):
        engine = KoszulEngine(Setting(1, 1, 2, 1), mode)
        for p in range(4):
            for q in range(3):
                for key, elements in engine._chain_blocks(p, q).items():
                    assert engine.block_elements(p, q, key) == elements, (mode, p, q, key)


def test_size_limit_applies_per_block(cubic):
    small = KoszulEngine(cubic, size_limit=5_000)
    with pytest.raises(SizeLimitExceeded):
        small.check_size(6, 1)
    assert small.kpq_dim(6, 1) == KoszulEngine(cubic).kpq_dim(6, 1)


def test_enumeration_limit(cubic, monkeypatch):
    strand = replace(CONFIG.strand, ENUMERATION_LIMIT=1_000)
    monkeypatch.setattr(koszul_engine, "CONFIG", replace(CONFIG, strand=strand))
    with pytest.raises(SizeLimitExceeded):
        KoszulEngine(cubic).kpq_dim(3, 1)


def test_large_characteristic_is_exact():
    big = KoszulEngine(Setting(1, 1, 2, 1, char=1_000_000_000_039)).betti_table((0, 3), [0, 1, 2])
    small = KoszulEngine(Setting(1, 1, 2, 1)).betti_table((0, 3), [0, 1, 2])
    assert big.entries == small.entries


def test_euler_characteristic(quadric):
    engine = KoszulEngine(quadric)
    sums = engine.euler_characteristic_check(engine.betti_table())
    assert sums
    assert all(chain == betti for chain, betti in sums.values())


def test_regularity_conditions(quadric):
    assert regularity_vanishing_holds(quadric)
    assert kunneth_regularity_vanishing(quadric)


def test_raw_cells_from_artinian_engine(quadric):
    engine = KoszulEngine(quadric)
    assert engine.raw_kpq_dim(1, 1) == engine.kpq_dim(1, 1) == 1
    assert engine.raw_kpq_dim(2, 1) == 0
