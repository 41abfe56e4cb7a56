"""
Ideal Engine
============
The regular-sequence forms g_t, graded pieces of the ideal R(n,d) they
generate, quotient bases of S/R, and two ideal-membership oracles:
brute-force row reduction in a graded piece, and the modular-degree path
that reduces membership in R(d) to membership in R(1).

Quotient bases are memoised per engine and persisted with diskcache.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable

from diskcache import Cache
from loguru import logger

from config import CACHE_DIR, CONFIG
from errors import NotHomogeneous, NotModularHomogeneous
from field_linalg import Scalar, Vector, axpy, make_field, rref
from multigrade import BiDegree, Monomial, Setting


# ------------------------------------------------------------------
#  Polynomials
# ------------------------------------------------------------------
class Polynomial:
    """Finite map Monomial -> nonzero scalar."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, Scalar] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def of(cls, m: Monomial, coeff: Scalar = 1) -> Polynomial:
        return cls({m: coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __add__(self, other: Polynomial) -> Polynomial:
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out)

    def __neg__(self) -> Polynomial:
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Monomial | Polynomial | int) -> Polynomial:
        if isinstance(other, Monomial):
            return Polynomial({m * other: c for m, c in self.terms.items()})
        if isinstance(other, Polynomial):
            out: dict[Monomial, Scalar] = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    out[m1 * m2] = out.get(m1 * m2, 0) + c1 * c2
            return Polynomial(out)
        return Polynomial({m: c * other for m, c in self.terms.items()})

    __rmul__ = __mul__

    def map_monomials(self, fn: Callable[[Monomial], Monomial | None]) -> Polynomial:
        """Apply fn termwise; terms mapped to None vanish."""
        out: dict[Monomial, Scalar] = {}
        for m, c in self.terms.items():
            image = fn(m)
            if image is not None:
                out[image] = out.get(image, 0) + c
        return Polynomial(out)

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms, key=Monomial.sort_key, reverse=True)

    @property
    def bidegree(self) -> BiDegree:
        degrees = {m.bidegree for m in self.terms}
        if len(degrees) != 1:
            raise NotHomogeneous(f"{self.text()} is not bihomogeneous")
        return degrees.pop()

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in self.monomials():
            c = self.terms[m]
            parts.append(m.text() if c == 1 else f"{c}*{m.text()}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.text()})"


def as_polynomial(f: Polynomial | Monomial) -> Polynomial:
    return f if isinstance(f, Polynomial) else Polynomial.of(f)


def regular_sequence_forms(setting: Setting) -> list[Polynomial]:
    """g_t = sum over i+j=t of x_i^d1 y_j^d2, for t = 0..|n|."""
    forms = []
    for t in range(setting.n_total + 1):
        terms = {}
        for i in range(max(0, t - setting.n2), min(t, setting.n1) + 1):
            terms[setting.x(i, setting.d1) * setting.y(t - i, setting.d2)] = 1
        forms.append(Polynomial(terms))
    return forms


def corrupted_forms(setting: Setting) -> list[Polynomial]:
    """
    Negative-control forms: g_1 loses its x_1^d1 y_0^d2 term, which breaks
    regularity of the sequence. Only meaningful for |n| >= 1.
    """
    forms = regular_sequence_forms(setting)
    dropped = setting.x(1, setting.d1) * setting.y(0, setting.d2)
    forms[1] = Polynomial({m: c for m, c in forms[1].terms.items() if m != dropped})
    return forms


# ------------------------------------------------------------------
#  Quotient Basis
# ------------------------------------------------------------------
@dataclass
class QuotientBasis:
    """
    Row-reduced R_a (or R_{a,k}) over the ambient monomials of S_a. Pivot
    monomials are leading terms of the ideal; the rest form the basis of
    the quotient piece. reducer maps a pivot column to the normal form of
    its monomial in quotient coordinates.
    """
    a: BiDegree
    k: int | None
    ambient: tuple[Monomial, ...]
    pivot_columns: frozenset[int]
    quotient_monomials: tuple[Monomial, ...]
    reducer: dict[int, Vector]
    ambient_index: dict[Monomial, int] = field(init=False, repr=False, compare=False)
    quotient_index: dict[Monomial, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.ambient_index = {m: i for i, m in enumerate(self.ambient)}
        self.quotient_index = {m: i for i, m in enumerate(self.quotient_monomials)}

    @property
    def dim(self) -> int:
        return len(self.quotient_monomials)

    @property
    def ideal_dim(self) -> int:
        return len(self.pivot_columns)

    def monomial_normal_form(self, m: Monomial) -> Vector:
        qi = self.quotient_index.get(m)
        if qi is not None:
            return {qi: 1}
        ai = self.ambient_index.get(m)
        if ai is None:
            raise NotHomogeneous(f"{m.text()} is not in the piece a={self.a} k={self.k}")
        return self.reducer[ai]

    def normal_form(self, f: Polynomial | Monomial, fld) -> Vector:
        out: Vector = {}
        for m, c in as_polynomial(f).terms.items():
            axpy(out, fld(c), self.monomial_normal_form(m), fld)
        return out


# ------------------------------------------------------------------
#  Restriction to a sub-product
# ------------------------------------------------------------------
@dataclass(frozen=True)
class Restriction:
    """Setting the last i x-variables and last j y-variables to zero."""
    source: Setting
    target: Setting
    forms: tuple[Polynomial, ...]

    def project(self, m: Monomial) -> Monomial | None:
        n1, n2 = self.target.n1, self.target.n2
        if any(m.xexp[n1 + 1:]) or any(m.yexp[n2 + 1:]):
            return None
        return Monomial(m.xexp[: n1 + 1], m.yexp[: n2 + 1])

    def project_polynomial(self, f: Polynomial) -> Polynomial:
        return f.map_monomials(self.project)

    def lift(self, m: Monomial) -> Monomial:
        """Embed a monomial of the smaller ring into the source ring."""
        pad_x = self.source.n1 - self.target.n1
        pad_y = self.source.n2 - self.target.n2
        return Monomial(m.xexp + (0,) * pad_x, m.yexp + (0,) * pad_y)


# ------------------------------------------------------------------
#  Engine
# ------------------------------------------------------------------
class IdealEngine:
    """
    Graded pieces of S/I for I generated by `forms` (default: the g_t).
    An empty form list gives the free ring S, used by the raw strands.
    """

    _registry: dict[tuple, IdealEngine] = {}
    _registry_lock = threading.Lock()

    def __init__(self, setting: Setting, forms: Iterable[Polynomial] | None = None,
                 tag: str = "std", use_disk_cache: bool | None = None):
        self.setting = setting
        self.fld = make_field(setting.char)
        if forms is None:
            forms, tag = regular_sequence_forms(setting), "std"
        self.forms = list(forms)
        self.tag = tag
        enabled = CONFIG.cache.ENABLED if use_disk_cache is None else use_disk_cache
        # only the canonical ideals are safe to share on disk
        self.use_disk_cache = enabled and tag in ("std", "free")
        self._pieces: dict[tuple, QuotientBasis] = {}
        self._prefix_engines: dict[int, IdealEngine] = {}
        self._lock = threading.Lock()
        self._cache: Cache | None = None

    # --- registry -------------------------------------------------
    @classmethod
    def for_setting(cls, setting: Setting) -> IdealEngine:
        return cls._registered(("std", setting), lambda: cls(setting))

    @classmethod
    def free(cls, setting: Setting) -> IdealEngine:
        return cls._registered(("free", setting), lambda: cls(setting, forms=[], tag="free"))

    @classmethod
    def corrupted(cls, setting: Setting) -> IdealEngine:
        return cls._registered(("corrupt", setting), lambda: cls(setting, forms=corrupted_forms(setting), tag="corrupt"))

    @classmethod
    def _registered(cls, key: tuple, build: Callable[[], IdealEngine]) -> IdealEngine:
        with cls._registry_lock:
            engine = cls._registry.get(key)
            if engine is None:
                engine = cls._registry[key] = build()
            return engine

    @classmethod
    def clear_registry(cls) -> None:
        with cls._registry_lock:
            cls._registry.clear()

    @property
    def cache(self) -> Cache:
        if self._cache is None:
            self._cache = Cache(directory=str(CACHE_DIR), size_limit=int(CONFIG.cache.CACHE_SIZE_LIMIT_GB * 1e9))
        return self._cache

    # --- graded pieces --------------------------------------------
    def ideal_piece(self, a: BiDegree, k: int | None = None) -> QuotientBasis:
        key = (tuple(a), k)
        with self._lock:
            piece = self._pieces.get(key)
        if piece is not None:
            return piece

        s = self.setting
        disk_key = f"quotient_{self.tag}_{s.n1}_{s.n2}_{s.d1}_{s.d2}_{s.char}_{a[0]}_{a[1]}_{k}"
        if self.use_disk_cache:
            piece = self.cache.get(disk_key)
        if piece is None:
            piece = self._build_piece(key[0], k)
            if self.use_disk_cache:
                self.cache.set(disk_key, piece, expire=CONFIG.cache.QUOTIENT_TTL)

        with self._lock:
            return self._pieces.setdefault(key, piece)

    def _build_piece(self, a: BiDegree, k: int | None) -> QuotientBasis:
        s = self.setting
        ambient = s.monomials(a, k)
        position = {m: i for i, m in enumerate(ambient)}
        rows: list[Vector] = []
        for form in self.forms:
            if form.is_zero():
                continue
            fa = form.bidegree
            cofactor = (a[0] - fa[0], a[1] - fa[1])
            if cofactor[0] < 0 or cofactor[1] < 0:
                continue
            if k is None:
                multipliers = s.monomials(cofactor)
            else:
                weights = {s.index_degree(m) for m in form.terms}
                if len(weights) != 1:
                    raise NotHomogeneous(f"form {form.text()} is not index-homogeneous")
                multipliers = s.monomials(cofactor, k - weights.pop())
            for mult in multipliers:
                rows.append({position[mult * t]: c for t, c in form.terms.items()})

        reduced = rref(rows, len(ambient), self.fld)
        pivots = frozenset(reduced)
        quotient = tuple(m for i, m in enumerate(ambient) if i not in pivots)
        qpos = {i: q for q, i in enumerate(i for i in range(len(ambient)) if i not in pivots)}
        reducer = {
            c: {qpos[j]: self.fld(-v) for j, v in row.items() if j != c}
            for c, row in reduced.items()
        }
        logger.debug(f"[{self.tag}] {s.label} piece a={a} k={k}: ambient {len(ambient)}, ideal {len(pivots)}")
        return QuotientBasis(tuple(a), k, ambient, pivots, quotient, reducer)

    def hilbert_function(self, a: BiDegree) -> int:
        """HF(a, I)."""
        return self.ideal_piece(a).ideal_dim

    def quotient_piece_dim(self, a: BiDegree, k: int | None = None) -> int:
        if a[0] < 0 or a[1] < 0:
            return 0
        return self.ideal_piece(a, k).dim

    def normal_form(self, f: Polynomial | Monomial) -> Vector:
        f = as_polynomial(f)
        if f.is_zero():
            return {}
        return self.ideal_piece(f.bidegree).normal_form(f, self.fld)

    # --- membership -----------------------------------------------
    def is_in_ideal_brute_force(self, f: Polynomial | Monomial) -> bool:
        return not self.normal_form(f)

    def is_in_ideal_modular_path(self, f: Polynomial | Monomial) -> bool:
        """f in R(d) iff (f / remd f)^(1/d) in R(1)."""
        f = as_polynomial(f)
        if f.is_zero():
            return True
        s = self.setting
        residues = {s.modular_degree(m) for m in f.terms}
        if len(residues) != 1:
            raise NotModularHomogeneous(f"{f.text()} mixes modular degrees")
        base = s.remd(next(iter(f.terms)))
        root = f.map_monomials(lambda m: s.dth_root(m / base))
        linear = IdealEngine.for_setting(s.with_degree(1, 1))
        return linear.is_in_ideal_brute_force(root)

    # --- derived ideals -------------------------------------------
    def partial_ideal_dim(self, c: BiDegree, t: int) -> int:
        """dim of (g_0..g_{t-1}) in bidegree c."""
        if t <= 0 or c[0] < 0 or c[1] < 0:
            return 0
        with self._lock:
            engine = self._prefix_engines.get(t)
            if engine is None:
                engine = self._prefix_engines[t] = IdealEngine(
                    self.setting, forms=self.forms[:t], tag=f"{self.tag}-prefix{t}")
        return engine.hilbert_function(c)

    def restrict_to_subproduct(self, i: int, j: int) -> Restriction:
        target = self.setting.restricted(i, j)
        shell = Restriction(self.setting, target, ())
        images = tuple(
            image for image in (shell.project_polynomial(g) for g in self.forms) if not image.is_zero()
        )
        return Restriction(self.setting, target, images)

    def modulo_last_variables(self, i: int, j: int) -> IdealEngine:
        """S / (R + <x_{n1-i+1}..x_{n1}, y_{n2-j+1}..y_{n2}>)."""
        s = self.setting
        extra = [Polynomial.of(s.x(v)) for v in range(s.n1 - i + 1, s.n1 + 1)]
        extra += [Polynomial.of(s.y(v)) for v in range(s.n2 - j + 1, s.n2 + 1)]
        return IdealEngine(s, forms=self.forms + extra, tag=f"{self.tag}-drop{i}.{j}")


def vanishing_clauses(n1: int, n2: int, a: BiDegree, k: int) -> set[int]:
    """
    Which of the four tri-degree vanishing conditions for d=(1,1) hold at
    (a, k). Conditions 1-3 are proven to force dim S̄_{a,k} = 0; condition 4
    is conjectural.
    """
    a1, a2 = a
    held = set()
    if a1 >= 1 and a2 >= n1 + 1:
        held.add(1)
    if a2 >= 1 and a1 >= n2 + 1:
        held.add(2)
    if 0 <= k <= a1 * a2 - 1:
        held.add(3)
    if k >= a1 * n1 + (n2 - a1) * a2 + 1:
        held.add(4)
    return held
