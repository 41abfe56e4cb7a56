"""
Field Linear Algebra
====================
Exact linear algebra over F_p and Q for graded pieces and Koszul strands.

  - PrimeField / RationalField: scalar normalisation and inverses.
  - SparseMatrix: coordinate-form matrix stored column-major as dicts.
  - EchelonBasis: incremental sparse elimination keyed by leading index.
  - rank / rref: sparse elimination with a dense numpy fallback once
    fill-in grows past CONFIG.linalg.FILL_IN_FACTOR.

Vectors are plain dicts {index: nonzero scalar}.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np
from loguru import logger

from config import CONFIG

Scalar = int | Fraction
Vector = dict[int, Scalar]


# ------------------------------------------------------------------
#  Fields
# ------------------------------------------------------------------
class PrimeField:
    def __init__(self, p: int):
        self.char = p

    def __call__(self, x: Scalar) -> int:
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.char)) % self.char
        return int(x) % self.char

    def inv(self, x: Scalar) -> int:
        return pow(int(x) % self.char, -1, self.char)

    def __repr__(self) -> str:
        return f"GF({self.char})"


class RationalField:
    char = 0

    def __call__(self, x: Scalar) -> Fraction:
        return Fraction(x)

    def inv(self, x: Scalar) -> Fraction:
        return 1 / Fraction(x)

    def __repr__(self) -> str:
        return "QQ"


Field = PrimeField | RationalField


@lru_cache(maxsize=None)
def make_field(char: int) -> Field:
    return RationalField() if char == 0 else PrimeField(char)


def normalize(vec: dict, fld: Field) -> Vector:
    out = {}
    for k, v in vec.items():
        v = fld(v)
        if v:
            out[k] = v
    return out


def axpy(target: Vector, coeff: Scalar, source: Vector, fld: Field) -> None:
    """target += coeff * source, in place, dropping zeros."""
    p = fld.char
    for k, v in source.items():
        new = target.get(k, 0) + coeff * v
        if p:
            new %= p
        if new:
            target[k] = new
        else:
            target.pop(k, None)


# ------------------------------------------------------------------
#  Sparse Matrix
# ------------------------------------------------------------------
@dataclass
class SparseMatrix:
    """Column-major coordinate matrix; no stored zeros, no duplicate cells."""
    nrows: int
    ncols: int
    fld: Field
    columns: list[Vector] = field(default_factory=list)

    @classmethod
    def from_columns(cls, nrows: int, columns: list[Vector], fld: Field) -> SparseMatrix:
        return cls(nrows, len(columns), fld, [normalize(c, fld) for c in columns])

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    def entries(self) -> Iterator[tuple[int, int, Scalar]]:
        for j, col in enumerate(self.columns):
            for i in sorted(col):
                yield i, j, col[i]

    def apply(self, vec: Vector) -> Vector:
        """self @ vec, vec indexed by column."""
        out: Vector = {}
        for j, c in vec.items():
            axpy(out, c, self.columns[j], self.fld)
        return out

    def multiply(self, other: SparseMatrix) -> SparseMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.ncols} vs {other.nrows}")
        return SparseMatrix(self.nrows, other.ncols, self.fld, [self.apply(c) for c in other.columns])

    def is_zero(self) -> bool:
        return all(not c for c in self.columns)

    def rank(self) -> int:
        return rank(self.columns, self.fld)

    def to_dense(self) -> np.ndarray:
        dtype = np.int64 if dense_ok(self.fld) else object
        out = np.zeros((self.nrows, self.ncols), dtype=dtype)
        for i, j, v in self.entries():
            out[i, j] = v
        return out


# ------------------------------------------------------------------
#  Sparse Echelon Basis
# ------------------------------------------------------------------
class EchelonBasis:
    """
    Incremental echelon form. Each stored vector is scaled so its
    smallest index (the pivot) has coefficient 1.
    """

    def __init__(self, fld: Field):
        self.fld = fld
        self.pivots: dict[int, Vector] = {}
        self.nnz = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, vec: Vector) -> Vector:
        residual = normalize(vec, self.fld)
        heap = [k for k in residual if k in self.pivots]
        heapq.heapify(heap)
        while heap:
            col = heapq.heappop(heap)
            coeff = residual.get(col)
            if not coeff:
                continue
            row = self.pivots[col]
            axpy(residual, -coeff, row, self.fld)
            # stored rows only carry indices above their pivot
            for k in row:
                if k != col and k in self.pivots and k in residual:
                    heapq.heappush(heap, k)
        return residual

    def add(self, vec: Vector) -> bool:
        """Insert vec; True when it was independent of the basis."""
        residual = self.reduce(vec)
        if not residual:
            return False
        lead = min(residual)
        inv = self.fld.inv(residual[lead])
        self.pivots[lead] = {k: self.fld(v * inv) for k, v in residual.items()}
        self.nnz += len(residual)
        return True

    def contains(self, vec: Vector) -> bool:
        return not self.reduce(vec)

    def reduced_rows(self) -> dict[int, Vector]:
        """Fully reduced echelon rows (no pivot column appears off its own row)."""
        done: dict[int, Vector] = {}
        for col in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[col])
            for k in [k for k in row if k != col and k in done]:
                coeff = row.get(k)
                if coeff:
                    axpy(row, -coeff, done[k], self.fld)
            done[col] = row
        return done


# ------------------------------------------------------------------
#  Dense fallbacks (prime fields only)
# ------------------------------------------------------------------
def _to_dense(vectors: list[Vector], p: int) -> np.ndarray:
    keys = sorted({k for v in vectors for k in v})
    position = {k: i for i, k in enumerate(keys)}
    A = np.zeros((len(vectors), len(keys)), dtype=np.int64)
    for r, vec in enumerate(vectors):
        for k, val in vec.items():
            A[r, position[k]] = int(val) % p
    return A


def dense_rank_modp(A: np.ndarray, p: int) -> int:
    A = A.copy() % p
    m, n = A.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        below = np.flatnonzero(A[r + 1:, c]) + r + 1
        if below.size:
            A[below] = (A[below] - np.outer(A[below, c], A[r])) % p
        r += 1
    return r


def dense_rref_modp(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    A = A.copy() % p
    m, n = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        col = A[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            A[others] = (A[others] - np.outer(col[others], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


# ------------------------------------------------------------------
#  Public entry points
# ------------------------------------------------------------------
def dense_ok(fld: Field) -> bool:
    """Dense int64 elimination is exact only for small prime characteristics."""
    return 0 < fld.char < CONFIG.linalg.DENSE_MAX_CHAR


def rank(vectors: Iterable[Vector], fld: Field) -> int:
    """
    Rank of a family of sparse vectors. Starts sparse; over a prime field
    switches to dense elimination when stored nonzeros exceed the
    fill-in factor times the input nonzeros.
    """
    vecs = [v for v in vectors if v]
    if not vecs:
        return 0
    original_nnz = sum(len(v) for v in vecs)
    basis = EchelonBasis(fld)
    for i, vec in enumerate(vecs):
        basis.add(vec)
        if dense_ok(fld) and basis.nnz > CONFIG.linalg.FILL_IN_FACTOR * original_nnz:
            width = len({k for v in vecs for k in v})
            if len(vecs) * width <= CONFIG.linalg.DENSE_FALLBACK_MAX_CELLS:
                logger.debug(f"fill-in {basis.nnz}/{original_nnz} after {i + 1} rows, going dense ({len(vecs)}x{width})")
                return dense_rank_modp(_to_dense(vecs, fld.char), fld.char)
    return basis.rank


def block_rank(blocks: Iterable[list[Vector]], fld: Field) -> int:
    return sum(rank(block, fld) for block in blocks)


def rref(rows: list[Vector], ncols: int, fld: Field) -> dict[int, Vector]:
    """
    Reduced row echelon form of the span of rows over columns 0..ncols-1,
    returned as {pivot column: row} with pivot coefficient 1.
    """
    rows = [r for r in rows if r]
    if not rows:
        return {}
    if dense_ok(fld) and ncols <= CONFIG.linalg.DENSE_PIECE_LIMIT and len(rows) * ncols <= CONFIG.linalg.DENSE_FALLBACK_MAX_CELLS:
        A = np.zeros((len(rows), ncols), dtype=np.int64)
        for r, vec in enumerate(rows):
            for k, val in vec.items():
                A[r, k] = int(val) % fld.char
        R, pivots = dense_rref_modp(A, fld.char)
        return {c: {int(j): int(R[i, j]) for j in np.flatnonzero(R[i])} for i, c in enumerate(pivots)}
    basis = EchelonBasis(fld)
    for vec in rows:
        basis.add(vec)
    return basis.reduced_rows()
