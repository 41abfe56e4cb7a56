"""
Multigrade Core
===============
Monomials of the bigraded Cox ring S = K[x_0..x_n1, y_0..y_n2] of
P^n1 x P^n2, the three gradings on them (bidegree, index-weighted degree,
modular degree), enumeration of graded pieces, and the remd / d-th root
maps onto the subring of d-th powers.

All types here are immutable value objects and safe to share.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from math import comb

from sympy import isprime

from errors import ConfigError, NotInSubring, OutOfRange

EXPONENT_MAX = 2**31 - 1

BiDegree = tuple[int, int]

_TOKEN = re.compile(r"^([xy])(\d+)(?:\^(\d+))?$")


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


# ------------------------------------------------------------------
#  Monomials
# ------------------------------------------------------------------
@dataclass(frozen=True)
class ModularDegree:
    xres: tuple[int, ...]
    yres: tuple[int, ...]

    def text(self) -> str:
        xs = ",".join(str(r) for r in self.xres)
        ys = ",".join(str(r) for r in self.yres)
        return f"(({xs}),({ys}))"


@dataclass(frozen=True)
class Monomial:
    """x^v y^w, keyed by its exponent tuples."""
    xexp: tuple[int, ...]
    yexp: tuple[int, ...]

    def __post_init__(self):
        for e in self.xexp + self.yexp:
            if e < 0:
                raise ConfigError(f"negative exponent in {self.xexp}/{self.yexp}")
            if e > EXPONENT_MAX:
                raise OverflowError(f"exponent {e} exceeds 32-bit width")

    @classmethod
    def one(cls, n1: int, n2: int) -> Monomial:
        return cls((0,) * (n1 + 1), (0,) * (n2 + 1))

    @classmethod
    def variable(cls, n1: int, n2: int, name: str, index: int, power: int = 1) -> Monomial:
        xexp, yexp = [0] * (n1 + 1), [0] * (n2 + 1)
        target = xexp if name == "x" else yexp
        if name not in ("x", "y") or not 0 <= index < len(target):
            raise OutOfRange(f"no variable {name}{index} in P^{n1} x P^{n2}")
        target[index] = power
        return cls(tuple(xexp), tuple(yexp))

    @property
    def bidegree(self) -> BiDegree:
        return (sum(self.xexp), sum(self.yexp))

    @property
    def degree(self) -> int:
        return sum(self.xexp) + sum(self.yexp)

    @property
    def exponents(self) -> tuple[int, ...]:
        return self.xexp + self.yexp

    def is_one(self) -> bool:
        return not any(self.xexp) and not any(self.yexp)

    def __mul__(self, other: Monomial) -> Monomial:
        return Monomial(
            tuple(a + b for a, b in zip(self.xexp, other.xexp)),
            tuple(a + b for a, b in zip(self.yexp, other.yexp)),
        )

    def divides(self, other: Monomial) -> bool:
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def __truediv__(self, other: Monomial) -> Monomial:
        if not other.divides(self):
            raise ValueError(f"{other.text()} does not divide {self.text()}")
        return Monomial(
            tuple(a - b for a, b in zip(self.xexp, other.xexp)),
            tuple(a - b for a, b in zip(self.yexp, other.yexp)),
        )

    def power(self, d1: int, d2: int) -> Monomial:
        """The image under x_i -> x_i^d1, y_j -> y_j^d2."""
        return Monomial(tuple(e * d1 for e in self.xexp), tuple(e * d2 for e in self.yexp))

    def uses(self, name: str, index: int) -> bool:
        exps = self.xexp if name == "x" else self.yexp
        return index < len(exps) and exps[index] > 0

    def support(self) -> list[tuple[str, int]]:
        return [("x", i) for i, e in enumerate(self.xexp) if e] + [
            ("y", j) for j, e in enumerate(self.yexp) if e
        ]

    def sort_key(self) -> tuple:
        # grevlex, x-block before y-block: larger key = larger monomial
        return (self.degree, tuple(-e for e in reversed(self.exponents)))

    def text(self) -> str:
        parts = []
        for name, exps in (("x", self.xexp), ("y", self.yexp)):
            for i, e in enumerate(exps):
                if e == 1:
                    parts.append(f"{name}{i}")
                elif e > 1:
                    parts.append(f"{name}{i}^{e}")
        return "*".join(parts) if parts else "1"

    def __str__(self) -> str:
        return self.text()

    @classmethod
    def parse(cls, text: str, n1: int, n2: int) -> Monomial:
        xexp, yexp = [0] * (n1 + 1), [0] * (n2 + 1)
        text = text.strip()
        if text == "1":
            return cls(tuple(xexp), tuple(yexp))
        for token in text.split("*"):
            match = _TOKEN.match(token.strip())
            if not match:
                raise ConfigError(f"cannot parse monomial factor '{token}'")
            name, index, power = match.group(1), int(match.group(2)), int(match.group(3) or 1)
            target = xexp if name == "x" else yexp
            if index >= len(target):
                raise ConfigError(f"variable {name}{index} not in P^{n1} x P^{n2}")
            target[index] += power
        return cls(tuple(xexp), tuple(yexp))


# ------------------------------------------------------------------
#  Enumeration (cached, pure)
# ------------------------------------------------------------------
@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for combo in itertools.combinations_with_replacement(range(parts), total):
        exps = [0] * parts
        for v in combo:
            exps[v] += 1
        out.append(tuple(exps))
    return tuple(out)


@lru_cache(maxsize=8192)
def _enumerate(n1: int, n2: int, d1: int, d2: int, a1: int, a2: int, k: int | None) -> tuple[Monomial, ...]:
    if a1 < 0 or a2 < 0:
        return ()
    monomials = []
    for xexp in _compositions(a1, n1 + 1):
        xw = d2 * sum(i * e for i, e in enumerate(xexp))
        if k is not None and xw > k:
            continue
        for yexp in _compositions(a2, n2 + 1):
            if k is not None and xw + d1 * sum(j * e for j, e in enumerate(yexp)) != k:
                continue
            monomials.append(Monomial(xexp, yexp))
    monomials.sort(key=Monomial.sort_key, reverse=True)
    return tuple(monomials)


# ------------------------------------------------------------------
#  Setting
# ------------------------------------------------------------------
@dataclass(frozen=True)
class Setting:
    """
    Ambient data fixing every grading: dimensions n, embedding bidegree d,
    twist b and the field characteristic (0 = exact rationals).
    """
    n1: int
    n2: int
    d1: int = 1
    d2: int = 1
    b1: int = 0
    b2: int = 0
    char: int = 32003

    def __post_init__(self):
        for name in ("n1", "n2", "d1", "d2", "b1", "b2", "char"):
            if not isinstance(getattr(self, name), int):
                raise ConfigError(f"{name} must be an integer")
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigError(f"n must be >= (1,1), got ({self.n1},{self.n2})")
        if self.d1 < 1 or self.d2 < 1:
            raise ConfigError(f"d must be >= (1,1), got ({self.d1},{self.d2})")
        if self.char != 0 and not isprime(self.char):
            raise ConfigError(f"char must be 0 or a prime, got {self.char}")

    @property
    def n(self) -> BiDegree:
        return (self.n1, self.n2)

    @property
    def d(self) -> BiDegree:
        return (self.d1, self.d2)

    @property
    def b(self) -> BiDegree:
        return (self.b1, self.b2)

    @property
    def n_total(self) -> int:
        return self.n1 + self.n2

    @property
    def r_nd(self) -> int:
        """r_{n,d} = dim S_d - 1, the dimension of the target projective space."""
        return binom(self.d1 + self.n1, self.n1) * binom(self.d2 + self.n2, self.n2) - 1

    @property
    def label(self) -> str:
        return f"n={self.n} d={self.d} b={self.b} char={self.char}"

    def as_dict(self) -> dict:
        return asdict(self)

    def with_degree(self, d1: int, d2: int) -> Setting:
        return replace(self, d1=d1, d2=d2)

    def restricted(self, i: int, j: int) -> Setting:
        """The setting of P^(n1-i) x P^(n2-j) with the same d, b, char."""
        if i < 0 or j < 0 or i >= self.n1 or j >= self.n2:
            raise OutOfRange(f"cannot drop ({i},{j}) variables from n={self.n}")
        return replace(self, n1=self.n1 - i, n2=self.n2 - j)

    def shift(self, q: int) -> BiDegree:
        """The bidegree q*d + b of the q-th piece of S(b;d)."""
        return (q * self.d1 + self.b1, q * self.d2 + self.b2)

    # --- monomial constructors -----------------------------------
    def one(self) -> Monomial:
        return Monomial.one(self.n1, self.n2)

    def x(self, i: int, power: int = 1) -> Monomial:
        return Monomial.variable(self.n1, self.n2, "x", i, power)

    def y(self, j: int, power: int = 1) -> Monomial:
        return Monomial.variable(self.n1, self.n2, "y", j, power)

    def parse(self, text: str) -> Monomial:
        return Monomial.parse(text, self.n1, self.n2)

    def check(self, m: Monomial) -> Monomial:
        if len(m.xexp) != self.n1 + 1 or len(m.yexp) != self.n2 + 1:
            raise ConfigError(f"{m.text()} has the wrong variable count for n={self.n}")
        return m

    # --- gradings ------------------------------------------------
    def index_degree(self, m: Monomial) -> int:
        """index.deg x_i = d2*i, index.deg y_j = d1*j."""
        return self.d2 * sum(i * e for i, e in enumerate(m.xexp)) + self.d1 * sum(
            j * e for j, e in enumerate(m.yexp)
        )

    def modular_degree(self, m: Monomial) -> ModularDegree:
        return ModularDegree(
            tuple(e % self.d1 for e in m.xexp),
            tuple(e % self.d2 for e in m.yexp),
        )

    def remd(self, m: Monomial) -> Monomial:
        res = self.modular_degree(m)
        return Monomial(res.xres, res.yres)

    def dth_root(self, m: Monomial) -> Monomial:
        if any(e % self.d1 for e in m.xexp) or any(e % self.d2 for e in m.yexp):
            raise NotInSubring(f"{m.text()} is not a d-th power for d={self.d}")
        return Monomial(tuple(e // self.d1 for e in m.xexp), tuple(e // self.d2 for e in m.yexp))

    def dth_power(self, m: Monomial) -> Monomial:
        return m.power(self.d1, self.d2)

    def monomials(self, a: BiDegree, k: int | None = None) -> tuple[Monomial, ...]:
        """All monomials of bidegree a (and index degree k), largest first in grevlex."""
        return _enumerate(self.n1, self.n2, self.d1, self.d2, a[0], a[1], k)

    def piece_dim(self, a: BiDegree) -> int:
        """dim S_a without enumerating."""
        if a[0] < 0 or a[1] < 0:
            return 0
        return binom(a[0] + self.n1, self.n1) * binom(a[1] + self.n2, self.n2)


# ------------------------------------------------------------------
#  Line bundle cohomology (Kunneth)
# ------------------------------------------------------------------
def projective_space_cohomology(n: int, a: int) -> dict[int, int]:
    """Nonzero h^i(P^n, O(a)): h^0 for a >= 0, h^n for a <= -n-1."""
    if a >= 0:
        return {0: binom(a + n, n)}
    if a <= -n - 1:
        return {n: binom(-a - 1, n)}
    return {}


def product_cohomology(n1: int, n2: int, a1: int, a2: int) -> dict[int, int]:
    """Nonzero h^i(P^n1 x P^n2, O(a1,a2)), keyed by i."""
    out: dict[int, int] = {}
    for i1, h1 in projective_space_cohomology(n1, a1).items():
        for i2, h2 in projective_space_cohomology(n2, a2).items():
            out[i1 + i2] = out.get(i1 + i2, 0) + h1 * h2
    return out
