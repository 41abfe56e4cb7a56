"""
Koszul Engine
=============
Koszul strands  ⋀^{p+1}V ⊗ W_{q-1} -> ⋀^p V ⊗ W_q -> ⋀^{p-1}V ⊗ W_{q+1}
and their cohomology K_{p,q}(n, b; d).

Two modes:
  - artinian : V = S̄_d, W_q = S̄_{qd+b} (quotient by the g_t). Requires the
               Cohen-Macaulay inequalities on (n, d, b).
  - raw      : V = S_d,  W_q = S_{qd+b}. The unreduced strand, used as an
               independent oracle.

Differentials are block-diagonal for the (index-weighted, modular) grading
in artinian mode and for the full exponent vector in raw mode, so ranks are
computed per block.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from config import CONFIG
from errors import ConfigError, HypothesisViolation, SizeLimitExceeded, SyzygyError
from field_linalg import SparseMatrix, Vector, axpy, rank
from ideal_engine import IdealEngine, Polynomial, QuotientBasis, as_polynomial
from multigrade import Monomial, Setting, binom, product_cohomology

MODES = ("artinian", "raw")

Cell = tuple[int, int]


# ------------------------------------------------------------------
#  Hypotheses on (n, d, b)
# ------------------------------------------------------------------
def is_cohen_macaulay(setting: Setting) -> bool:
    """S(b;d) is CM iff d1/d2*b2 - b1 < n1+1 and d2/d1*b1 - b2 < n2+1 (cleared of denominators)."""
    s = setting
    return (s.d1 * s.b2 - s.d2 * s.b1 < s.d2 * (s.n1 + 1)) and (
        s.d2 * s.b1 - s.d1 * s.b2 < s.d1 * (s.n2 + 1)
    )


def regularity_vanishing_holds(setting: Setting) -> bool:
    """Sufficient condition for K_{p,q} = 0 whenever q > |n|."""
    s = setting
    first = s.d1 + s.b1 * s.n2 > -s.n1 - 1 or s.d2 + s.b2 * s.n2 < 0
    second = s.d1 + s.b1 * s.n1 < 0 or s.d2 + s.b2 * s.n1 > -s.n2 - 1
    return first and second


def kunneth_regularity_vanishing(setting: Setting) -> bool:
    """h^i(O(d + (|n|-i) b)) = 0 for every i > 0, computed by Kunneth."""
    s = setting
    for i in range(1, s.n_total + 1):
        twist = s.n_total - i
        if product_cohomology(s.n1, s.n2, s.d1 + twist * s.b1, s.d2 + twist * s.b2).get(i, 0):
            return False
    return True


# ------------------------------------------------------------------
#  Wedge basis
# ------------------------------------------------------------------
class WedgeBasis:
    """p-subsets of generator positions, ranked lexicographically."""

    def __init__(self, generators: Sequence[Monomial], p: int):
        self.generators = tuple(generators)
        self.p = p
        self.n = len(self.generators)

    def __len__(self) -> int:
        return binom(self.n, self.p)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return itertools.combinations(range(self.n), self.p)

    def rank(self, subset: Sequence[int]) -> int:
        return binom(self.n, self.p) - 1 - sum(
            binom(self.n - 1 - c, self.p - i) for i, c in enumerate(subset)
        )

    def unrank(self, index: int) -> tuple[int, ...]:
        out, c = [], 0
        for i in range(self.p):
            while True:
                count = binom(self.n - 1 - c, self.p - 1 - i)
                c += 1
                if index < count:
                    out.append(c - 1)
                    break
                index -= count
        return tuple(out)

    def monomials(self, subset: Sequence[int]) -> list[Monomial]:
        return [self.generators[i] for i in subset]


def sort_with_sign(positions: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Sorted positions and the sign of the sorting permutation; sign 0 on repeats."""
    if len(set(positions)) != len(positions):
        return tuple(sorted(positions)), 0
    inversions = sum(1 for a, b in itertools.combinations(positions, 2) if a > b)
    return tuple(sorted(positions)), -1 if inversions % 2 else 1


# ------------------------------------------------------------------
#  Strand + table
# ------------------------------------------------------------------
@dataclass
class KoszulStrand:
    p: int
    q: int
    din: SparseMatrix       # ∂_{p+1,q-1}
    dout: SparseMatrix      # ∂_{p,q}

    def cohomology_dim(self) -> int:
        return self.dout.ncols - self.dout.rank() - self.din.rank()


@dataclass
class BettiTable:
    setting: Setting
    mode: str
    entries: dict[Cell, int] = field(default_factory=dict)
    skipped: dict[Cell, int] = field(default_factory=dict)   # cell -> columns needed

    def get(self, p: int, q: int) -> int | None:
        return self.entries.get((p, q))

    def nonzero(self) -> dict[Cell, int]:
        return {cell: v for cell, v in sorted(self.entries.items()) if v}

    def row(self, q: int) -> dict[int, int]:
        return {p: v for (p, qq), v in sorted(self.entries.items()) if qq == q}

    def row_complete(self, q: int) -> bool:
        return not any(qq == q for _, qq in self.skipped)

    def to_dict(self) -> dict:
        out = {
            "setting": self.setting.as_dict(),
            "char": self.setting.char,
            "mode": self.mode,
            "entries": [{"p": p, "q": q, "dim": v} for (p, q), v in sorted(self.entries.items())],
            "r": self.setting.r_nd,
        }
        if self.skipped:
            out["skipped"] = [{"p": p, "q": q, "columns": c} for (p, q), c in sorted(self.skipped.items())]
        return out

    def to_frame(self) -> pd.DataFrame:
        rows = [{"p": p, "q": q, "dim": v} for (p, q), v in sorted(self.entries.items())]
        return pd.DataFrame(rows, columns=["p", "q", "dim"])

    def __str__(self) -> str:
        cells = set(self.entries) | set(self.skipped)
        if not cells:
            return "(empty)"
        ps = range(min(p for p, _ in cells), max(p for p, _ in cells) + 1)
        qs = range(min(q for _, q in cells), max(q for _, q in cells) + 1)

        def show(p, q):
            if (p, q) in self.skipped:
                return "?"
            v = self.entries.get((p, q), 0)
            return str(v) if v else "."

        totals = {p: sum(v for (pp, _), v in self.entries.items() if pp == p) for p in ps}
        widths = {p: max(len(str(p)), len(str(totals[p])), *(len(show(p, q)) for q in qs)) for p in ps}
        lines = [" ".join([f"{'':>6}"] + [f"{p:>{widths[p]}}" for p in ps])]
        lines.append(" ".join([f"{'total:':>6}"] + [f"{totals[p]:>{widths[p]}}" for p in ps]))
        for q in qs:
            lines.append(" ".join([f"{f'{q}:':>6}"] + [f"{show(p, q):>{widths[p]}}" for p in ps]))
        return "\n".join(lines)


def rho_q(table: BettiTable, q: int) -> Fraction:
    """#{p : K_{p,q} != 0} / r over the computed cells of row q."""
    return Fraction(sum(1 for v in table.row(q).values() if v), table.setting.r_nd)


# ------------------------------------------------------------------
#  Engine
# ------------------------------------------------------------------
class KoszulEngine:
    def __init__(self, setting: Setting, mode: str = "artinian", size_limit: int | None = None,
                 ideal: IdealEngine | None = None):
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got '{mode}'")
        if mode == "artinian" and not is_cohen_macaulay(setting):
            raise HypothesisViolation(
                f"S(b;d) is not Cohen-Macaulay for {setting.label}; Artinian reduction "
                "does not apply, use raw mode")
        self.setting = setting
        self.mode = mode
        self.size_limit = size_limit or CONFIG.strand.SIZE_LIMIT
        if ideal is None:
            ideal = IdealEngine.for_setting(setting) if mode == "artinian" else IdealEngine.free(setting)
        self.ideal = ideal
        self.fld = ideal.fld
        # grading blocks are only guaranteed for the canonical ideals
        self.blocked = ideal.tag in ("std", "free")

        self.generators = self.ideal.ideal_piece(setting.d).quotient_monomials
        self.N = len(self.generators)
        self._gen_keys = np.array([self._key_vector(m) for m in self.generators], dtype=np.int64)
        self._gen_keys = self._gen_keys.reshape(self.N, len(self._key_vector(setting.one())))
        self._products: dict[tuple[int, int, int], Vector] = {}
        self._raw: KoszulEngine | None = None
        self._top: int | None | bool = False
        logger.debug(f"[{mode}] {setting.label}: {self.N} generators")

    # --- graded pieces --------------------------------------------
    def _w_piece(self, q: int) -> QuotientBasis | None:
        a = self.setting.shift(q)
        if a[0] < 0 or a[1] < 0:
            return None
        return self.ideal.ideal_piece(a)

    def dim_w(self, q: int) -> int:
        top = self._top_q()
        if top is not None and q > top:
            return 0
        piece = self._w_piece(q)
        return piece.dim if piece else 0

    def _top_q(self) -> int | None:
        """Last q with W_q != 0 when S̄(b;d) is known to be Artinian, else None."""
        if self._top is not False:
            return self._top
        self._top = None
        if self.mode == "artinian" and self.blocked and min(self.setting.b) >= 0:
            # W_{q+1} = V . W_q once b >= 0, so the first zero piece ends the module
            for q in range(self.setting.n_total + CONFIG.regseq.DEGREE_BOUND_OFFSET + 2):
                piece = self._w_piece(q)
                if piece is not None and piece.dim == 0:
                    self._top = q - 1
                    break
        return self._top

    def chain_dim(self, p: int, q: int) -> int:
        if p < 0 or p > self.N:
            return 0
        return binom(self.N, p) * self.dim_w(q)

    def wedge(self, p: int) -> WedgeBasis:
        return WedgeBasis(self.generators, p)

    # --- grading keys ---------------------------------------------
    def _key_vector(self, m: Monomial) -> tuple[int, ...]:
        return (self.setting.index_degree(m),) + m.exponents

    def _finish_key(self, v: Sequence[int]) -> tuple:
        if not self.blocked:
            return ()
        if self.mode == "raw":
            return tuple(int(e) for e in v[1:])
        s = self.setting
        xs = v[1: s.n1 + 2]
        ys = v[s.n1 + 2:]
        return (int(v[0]),) + tuple(int(e) % s.d1 for e in xs) + tuple(int(e) % s.d2 for e in ys)

    def _chain_blocks(self, p: int, q: int) -> dict[tuple, list[tuple[int, tuple[int, ...], int]]]:
        """Basis of ⋀^p V ⊗ W_q grouped by grading key: key -> [(index, J, w)]."""
        piece = self._w_piece(q)
        if piece is None or piece.dim == 0 or p < 0 or p > self.N:
            return {}
        combos = list(itertools.combinations(range(self.N), p))
        combo_arr = np.array(combos, dtype=np.int64).reshape(len(combos), p)
        wedge_keys = self._gen_keys[combo_arr].sum(axis=1)
        w_keys = np.array([self._key_vector(m) for m in piece.quotient_monomials], dtype=np.int64)

        blocks: dict[tuple, list] = {}
        dim_w = piece.dim
        for ci, J in enumerate(combos):
            for wi in range(dim_w):
                key = self._finish_key(wedge_keys[ci] + w_keys[wi])
                blocks.setdefault(key, []).append((ci * dim_w + wi, J, wi))
        return blocks

    def block_key(self, p: int, q: int, index: int) -> tuple:
        piece = self._w_piece(q)
        ci, wi = divmod(index, piece.dim)
        J = self.wedge(p).unrank(ci)
        v = np.zeros(self._gen_keys.shape[1], dtype=np.int64)
        for j in J:
            v += self._gen_keys[j]
        return self._finish_key(v + np.array(self._key_vector(piece.quotient_monomials[wi]), dtype=np.int64))

    def _target_index(self, key: tuple) -> int:
        if self.mode == "artinian":
            return key[0]
        s = self.setting
        return s.index_degree(Monomial(tuple(key[: s.n1 + 1]), tuple(key[s.n1 + 1:])))

    def block_elements(self, p: int, q: int, key: tuple) -> list[tuple[int, tuple[int, ...], int]]:
        """
        The (index, J, w) of ⋀^p V ⊗ W_q with grading key `key`, found by a
        depth-first search over generators sorted by index degree. The strand
        is never enumerated as a whole.
        """
        piece = self._w_piece(q)
        if piece is None or piece.dim == 0 or p < 0 or p > self.N:
            return []
        if not self.blocked:
            self._guard(self.chain_dim(p, q), f"⋀^{p}V ⊗ W_{q}")
            return self._chain_blocks(p, q).get(key, [])

        order = sorted(range(self.N), key=lambda j: (int(self._gen_keys[j, 0]), j))
        weights = [int(self._gen_keys[j, 0]) for j in order]
        prefix = [0]
        for w in weights:
            prefix.append(prefix[-1] + w)
        target = self._target_index(key)
        wedge, dim_w = self.wedge(p), piece.dim
        found: list[tuple[int, tuple[int, ...], int]] = []
        visited = 0

        def search(start: int, chosen: list[int], left: int, need: int, wi: int, w_key: np.ndarray):
            nonlocal visited
            visited += 1
            if visited > CONFIG.strand.BLOCK_SEARCH_LIMIT:
                raise SizeLimitExceeded(visited, CONFIG.strand.BLOCK_SEARCH_LIMIT, f"block search in ⋀^{p}V ⊗ W_{q}")
            if left == 0:
                if need == 0:
                    J = tuple(sorted(chosen))
                    v = self._gen_keys[list(J)].sum(axis=0) if J else np.zeros_like(w_key)
                    if self._finish_key(v + w_key) == key:
                        found.append((wedge.rank(J) * dim_w + wi, J, wi))
                        self._guard(len(found), f"block of ⋀^{p}V ⊗ W_{q}")
                return
            if prefix[self.N] - prefix[self.N - left] < need:
                return
            for pos in range(start, self.N - left + 1):
                if prefix[pos + left] - prefix[pos] > need:
                    break
                chosen.append(order[pos])
                search(pos + 1, chosen, left - 1, need - weights[pos], wi, w_key)
                chosen.pop()

        for wi, w in enumerate(piece.quotient_monomials):
            w_key = np.array(self._key_vector(w), dtype=np.int64)
            need = target - int(w_key[0])
            if need >= 0:
                search(0, [], p, need, wi, w_key)
        return sorted(found)


    # --- differential ---------------------------------------------
    def _product(self, j: int, q: int, wi: int) -> Vector:
        key = (j, q, wi)
        nf = self._products.get(key)
        if nf is None:
            m = self.generators[j] * self._w_piece(q).quotient_monomials[wi]
            nf = self._products[key] = self._w_piece(q + 1).monomial_normal_form(m)
        return nf

    def _boundary(self, p: int, q: int, J: tuple[int, ...], wi: int) -> Vector:
        """∂(m_J ⊗ w) = Σ_i (-1)^i m_{J - j_i} ⊗ [m_{j_i} w], i counted from 1."""
        if p == 0:
            return {}
        target = self.wedge(p - 1)
        dim_next = self.dim_w(q + 1)
        col: Vector = {}
        for pos, j in enumerate(J):
            sign = -1 if pos % 2 == 0 else 1
            base = target.rank(J[:pos] + J[pos + 1:]) * dim_next
            nf = self._product(j, q, wi)
            axpy(col, sign, {base + w2: c for w2, c in nf.items()}, self.fld)
        return col

    def apply_differential(self, p: int, q: int, vec: Vector) -> Vector:
        """∂_{p,q} applied to a coordinate vector of ⋀^p V ⊗ W_q."""
        out: Vector = {}
        if not vec:
            return out
        wedge, dim_w = self.wedge(p), self.dim_w(q)
        for index, c in vec.items():
            ci, wi = divmod(index, dim_w)
            axpy(out, c, self._boundary(p, q, wedge.unrank(ci), wi), self.fld)
        return out

    def boundary_block(self, p: int, q: int, key: tuple) -> list[Vector]:
        """Images under ∂_{p,q} of the basis elements of ⋀^p V ⊗ W_q in one block."""
        return [self._boundary(p, q, J, wi) for _, J, wi in self.block_elements(p, q, key)]

    def chain_vector(self, factors: Sequence[Monomial], payload: Polynomial | Monomial, q: int) -> Vector:
        """
        Coordinates of m_1 ∧ ... ∧ m_p ⊗ payload in ⋀^p V ⊗ W_q. Factors
        outside the basis of V are expanded through their normal forms.
        """
        piece = self._w_piece(q)
        if piece is None:
            return {}
        v_piece = self.ideal.ideal_piece(self.setting.d)
        forms = [list(v_piece.normal_form(m, self.fld).items()) for m in factors]
        payload_nf = piece.normal_form(as_polynomial(payload), self.fld)
        wedge = self.wedge(len(factors))
        out: Vector = {}
        for choice in itertools.product(*forms):
            J, sign = sort_with_sign([j for j, _ in choice])
            if sign == 0:
                continue
            coeff = sign
            for _, c in choice:
                coeff *= c
            base = wedge.rank(J) * piece.dim
            axpy(out, self.fld(coeff), {base + w: c for w, c in payload_nf.items()}, self.fld)
        return out

    # --- strands --------------------------------------------------
    def _guard(self, columns: int, what: str) -> None:
        if columns > self.size_limit:
            raise SizeLimitExceeded(columns, self.size_limit, what)

    def check_size(self, p: int, q: int) -> None:
        """Whole-strand guard, for callers that build the full matrices."""
        self._guard(max(self.chain_dim(p, q), self.chain_dim(p + 1, q - 1)), f"K_{{{p},{q}}} strand")

    def _check_enumeration(self, p: int, q: int) -> None:
        columns = self.chain_dim(p, q) + self.chain_dim(p + 1, q - 1)
        if columns > CONFIG.strand.ENUMERATION_LIMIT:
            raise SizeLimitExceeded(columns, CONFIG.strand.ENUMERATION_LIMIT, f"K_{{{p},{q}}} enumeration")

    def _all_columns(self, p: int, q: int) -> list[Vector]:
        dim_w = self.dim_w(q)
        if dim_w == 0 or p < 0 or p > self.N:
            return []
        return [self._boundary(p, q, J, wi) for J in self.wedge(p) for wi in range(dim_w)]

    def build_strand(self, p: int, q: int) -> KoszulStrand:
        self.check_size(p, q)
        din = SparseMatrix.from_columns(self.chain_dim(p, q), self._all_columns(p + 1, q - 1), self.fld)
        dout = SparseMatrix.from_columns(self.chain_dim(p - 1, q + 1), self._all_columns(p, q), self.fld)
        if din.ncols + dout.ncols <= CONFIG.strand.COMPLEX_CHECK_MAX_COLS and not dout.multiply(din).is_zero():
            raise SyzygyError(f"dout . din != 0 at (p,q)=({p},{q}) for {self.setting.label}")
        logger.debug(f"[{self.mode}] strand ({p},{q}): din {din.nrows}x{din.ncols}, dout {dout.nrows}x{dout.ncols}")
        return KoszulStrand(p, q, din, dout)

    def kpq_dim(self, p: int, q: int) -> int:
        """dim K_{p,q} = dim C_{p,q} - rank ∂_{p,q} - rank ∂_{p+1,q-1}, summed over blocks."""
        if self.chain_dim(p, q) == 0:
            return 0
        if not self.blocked:
            self.check_size(p, q)
        self._check_enumeration(p, q)
        middle = self._chain_blocks(p, q)
        inner = self._chain_blocks(p + 1, q - 1)
        for key, elems in middle.items():
            self._guard(max(len(elems), len(inner.get(key, ()))), f"K_{{{p},{q}}} block {key}")
        total = 0
        for key, elems in middle.items():
            out_rank = rank((self._boundary(p, q, J, wi) for _, J, wi in elems), self.fld) if p else 0
            in_rank = rank((self._boundary(p + 1, q - 1, J, wi) for _, J, wi in inner.get(key, ())), self.fld)
            total += len(elems) - out_rank - in_rank
        return total

    def raw_kpq_dim(self, p: int, q: int) -> int:
        if self.mode == "raw":
            return self.kpq_dim(p, q)
        if self._raw is None:
            self._raw = KoszulEngine(self.setting, "raw", self.size_limit)
        return self._raw.kpq_dim(p, q)

    def betti_table(self, p_window: tuple[int, int] | None = None,
                    q_values: Sequence[int] | None = None) -> BettiTable:
        s = self.setting
        p_lo, p_hi = p_window or (0, s.r_nd)
        if q_values is None:
            q_values = range(0, s.n_total + CONFIG.strand.BETTI_Q_EXTRA + 1)
        table = BettiTable(s, self.mode)
        for q in q_values:
            for p in range(max(p_lo, 0), p_hi + 1):
                try:
                    table.entries[(p, q)] = self.kpq_dim(p, q)
                except SizeLimitExceeded as exc:
                    table.skipped[(p, q)] = exc.columns
                    logger.warning(f"[{self.mode}] {s.label}: skipped K_{p},{q} ({exc})")
        logger.info(f"[{self.mode}] {s.label}: {len(table.entries)} cells, {len(table.skipped)} skipped")
        return table

    def euler_characteristic_check(self, table: BettiTable) -> dict[int, tuple[int, int]]:
        """
        For each diagonal p+q = w fully covered by the table:
        w -> (Σ(-1)^p dim C_{p,w-p}, Σ(-1)^p K_{p,w-p}). The two must agree.
        """
        if not table.entries:
            return {}
        out = {}
        for w in range(max(p + q for p, q in table.entries) + 1):
            chain_sum = betti_sum = 0
            complete = True
            for p in range(self.N + 1):
                dim = self.chain_dim(p, w - p)
                if not dim:
                    continue
                k = table.entries.get((p, w - p))
                if k is None:
                    complete = False
                    break
                sign = -1 if p % 2 else 1
                chain_sum += sign * dim
                betti_sum += sign * k
            if complete:
                out[w] = (chain_sum, betti_sum)
        return out
