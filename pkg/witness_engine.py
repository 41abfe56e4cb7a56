"""
Witness Engine
==============
Explicit non-vanishing syzygies and the range formulas they certify.

  - f̃_{q,k}        : the generator of S̄(1) in bidegree (k, q-k), index k(q-k)
  - f_{q,k,b}      : its lift to bidegree qd + b, nonzero in S̄
  - L(f), Z(f)     : degree-d basis monomials below f in index degree / killing f
  - WitnessCocycle : ζ = m_1 ∧ ... ∧ m_p ⊗ f, verified against the strand
  - ranges         : per-k and global non-vanishing ranges, ρ_q lower bounds
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from loguru import logger

from config import CONFIG
from errors import HypothesisViolation, OutOfRange, RangeEmpty
from field_linalg import EchelonBasis, rank
from ideal_engine import IdealEngine, Restriction
from koszul_engine import KoszulEngine, is_cohen_macaulay
from multigrade import Monomial, Setting, binom

Variable = tuple[str, int]

VALID_FLAGS = {"nonzero": True, "cocycle": True, "coboundary": False}


# ------------------------------------------------------------------
#  f̃_{q,k}
# ------------------------------------------------------------------
def _check_qk(setting: Setting, q: int, k: int) -> None:
    if not (0 <= k <= q and q - k <= setting.n1 and k <= setting.n2):
        raise OutOfRange(f"(q,k)=({q},{k}) needs 0 <= k <= q, q-k <= {setting.n1}, k <= {setting.n2}")


def build_tilde_f(setting: Setting, q: int, k: int) -> Monomial:
    """Canonical representative of f̃_{q,k} in the d=(1,1) ring on the same variables."""
    _check_qk(setting, q, k)
    if q == 0:
        return setting.one()
    if k == 0:
        return setting.y(0, q)
    if k == q:
        return setting.x(0, q)
    return setting.x(q - k) * setting.y(k - 1) * build_tilde_f(setting, q - 2, k - 1)


def tilde_f_relations(setting: Setting, q: int, k: int) -> dict[str, bool]:
    """
    The recursion identities for f̃_{q,k} checked in S̄(1): each applicable
    right-hand side must be nonzero and proportional to f̃_{q,k}.
    """
    _check_qk(setting, q, k)
    linear = setting.with_degree(1, 1)
    f = build_tilde_f(linear, q, k)
    candidates = {}
    if k >= 1:
        candidates["x_{q-k} f~_{q-1,k-1}"] = lambda: linear.x(q - k) * build_tilde_f(linear, q - 1, k - 1)
    if k <= q - 1:
        candidates["y_k f~_{q-1,k}"] = lambda: linear.y(k) * build_tilde_f(linear, q - 1, k)
    if 1 <= k <= q - 1:
        candidates["x_{q-k} y_{k-1} f~_{q-2,k-1}"] = lambda: (
            linear.x(q - k) * linear.y(k - 1) * build_tilde_f(linear, q - 2, k - 1))
        candidates["x_{q-k-1} y_k f~_{q-2,k-1}"] = lambda: (
            linear.x(q - k - 1) * linear.y(k) * build_tilde_f(linear, q - 2, k - 1))

    engine = IdealEngine.for_setting(linear)
    piece = engine.ideal_piece(f.bidegree, linear.index_degree(f))
    target = piece.normal_form(f, engine.fld)
    results = {}
    for name, build in candidates.items():
        other = piece.normal_form(build(), engine.fld)
        results[name] = bool(target) and bool(other) and rank([target, other], engine.fld) == 1
    return results


# ------------------------------------------------------------------
#  f_{q,k,b}
# ------------------------------------------------------------------
def fqkb_case(setting: Setting, q: int, k: int) -> int:
    """1: both shifted exponents >= 0; 2: q-k+b1 < 0; 3: k+b2 < 0."""
    _check_qk(setting, q, k)
    if not 0 < q <= setting.n_total:
        raise OutOfRange(f"q={q} outside 1..{setting.n_total}")
    s = setting
    ex, ey = q - k + s.b1, k + s.b2
    failed = []
    if s.d1 <= abs(ex):
        failed.append(f"d1 > |q-k+b1| ({s.d1} <= {abs(ex)})")
    if s.d2 <= abs(ey):
        failed.append(f"d2 > |k+b2| ({s.d2} <= {abs(ey)})")
    if ex < 0 and ey < 0:
        failed.append("q-k+b1 and k+b2 both negative")
    if ex < 0 and k == 0:
        failed.append("q-k+b1 < 0 requires k != 0")
    if failed:
        raise HypothesisViolation(f"f_{{{q},{k},b}} undefined for {s.label}: " + "; ".join(failed))
    if ex < 0:
        return 2
    if ey < 0:
        return 3
    return 1


def floor_lemma_target(setting: Setting, q: int, k: int) -> Monomial:
    """The f̃ that (f_{q,k,b} / remd f_{q,k,b})^{1/d} must equal."""
    case = fqkb_case(setting, q, k)
    linear = setting.with_degree(1, 1)
    if case == 2:
        return build_tilde_f(linear, q - 1, k - 1)
    if case == 3:
        return build_tilde_f(linear, q - 1, k)
    return build_tilde_f(linear, q, k)


def build_fqkb(setting: Setting, q: int, k: int) -> Monomial:
    s = setting
    case = fqkb_case(s, q, k)
    ex, ey = q - k + s.b1, k + s.b2
    if case == 2:
        ex += s.d1
    elif case == 3:
        ey += s.d2
    out = s.x(q - k, ex) * s.y(k, ey) * s.dth_power(floor_lemma_target(s, q, k))
    for i in range(q - k):
        out = out * s.x(i, s.d1 - 1)
    for j in range(k):
        out = out * s.y(j, s.d2 - 1)
    return out


def linear_annihilator_variables(setting: Setting, q: int, k: int) -> list[Variable]:
    case = fqkb_case(setting, q, k)
    x_top = q - k - (2 if case == 3 else 1)
    y_top = k - (2 if case == 2 else 1)
    return [("x", i) for i in range(x_top + 1)] + [("y", j) for j in range(y_top + 1)]


# ------------------------------------------------------------------
#  L(f), Z(f)
# ------------------------------------------------------------------
def l_set(setting: Setting, f: Monomial) -> list[Monomial]:
    basis = IdealEngine.for_setting(setting).ideal_piece(setting.d).quotient_monomials
    cap = setting.index_degree(f)
    return [m for m in basis if setting.index_degree(m) <= cap]


def z_set(setting: Setting, f: Monomial) -> list[Monomial]:
    engine = IdealEngine.for_setting(setting)
    basis = engine.ideal_piece(setting.d).quotient_monomials
    return [m for m in basis if engine.is_in_ideal_brute_force(m * f)]


# ------------------------------------------------------------------
#  Ranges
# ------------------------------------------------------------------
def _admissible(setting: Setting, q: int) -> list[tuple[int, int]]:
    return [(i, q - i) for i in range(0, q + 1) if i <= setting.n1 and q - i <= setting.n2]


def _lower_term(s: Setting, i: int, j: int) -> int:
    return binom(s.d1 + i, i) * binom(s.d2 + j, j)


def _upper_term(s: Setting, i: int, j: int) -> int:
    return binom(s.d1 + s.n1 - i, s.n1 - i) * binom(s.d2 + s.n2 - j, s.n2 - j)


def thm_c_guards(setting: Setting, q: int) -> list[str]:
    """Failed hypotheses of the non-vanishing range at q; empty when it applies."""
    s = setting
    failed = []
    if s.b1 < 0 or s.b2 < 0:
        failed.append(f"b >= 0 (b={s.b})")
    if s.d1 <= q + s.b1:
        failed.append(f"d1 > q+b1 ({s.d1} <= {q + s.b1})")
    if s.d2 <= q + s.b2:
        failed.append(f"d2 > q+b2 ({s.d2} <= {q + s.b2})")
    if not is_cohen_macaulay(s):
        failed.append("d1/d2*b2 - b1 < n1+1 and d2/d1*b1 - b2 < n2+1")
    return failed


def _require_guards(setting: Setting, q: int) -> None:
    failed = thm_c_guards(setting, q)
    if failed:
        raise HypothesisViolation(f"range at q={q} needs " + "; ".join(failed))


def theorem_a_range(setting: Setting, q: int) -> tuple[int, int] | None:
    """(lo, hi) with K_{p,q} != 0 for lo <= p <= hi; None when q is outside 1..|n|."""
    if not 1 <= q <= setting.n_total:
        return None
    _require_guards(setting, q)
    pairs = _admissible(setting, q)
    lo = min(_lower_term(setting, i, j) for i, j in pairs) - (q + 2)
    hi = setting.r_nd - min(_upper_term(setting, i, j) for i, j in pairs) - (setting.n_total + 1)
    return lo, hi


def per_k_range(setting: Setting, q: int, k: int) -> tuple[int, int]:
    """The summand (i, j) = (q-k, k) of the range."""
    _check_qk(setting, q, k)
    if not 1 <= q <= setting.n_total:
        raise OutOfRange(f"q={q} outside 1..{setting.n_total}")
    _require_guards(setting, q)
    i, j = q - k, k
    lo = _lower_term(setting, i, j) - (q + 2)
    hi = setting.r_nd - _upper_term(setting, i, j) - (setting.n_total + 1)
    return lo, hi


def rho_lower_bound(setting: Setting, q: int) -> Fraction:
    """1 - Σ_{i+j=q} (U_ij + L_ij)/r - (|n|-q-1)/r."""
    _require_guards(setting, q)
    r = setting.r_nd
    total = sum(_upper_term(setting, i, j) + _lower_term(setting, i, j) for i, j in _admissible(setting, q))
    return 1 - Fraction(total, r) - Fraction(setting.n_total - q - 1, r)


def rho_lower_bound_min(setting: Setting, q: int) -> Fraction:
    """1 - U_min/r - L_min/r - (|n|-q-1)/r."""
    _require_guards(setting, q)
    r = setting.r_nd
    pairs = _admissible(setting, q)
    u = min(_upper_term(setting, i, j) for i, j in pairs)
    low = min(_lower_term(setting, i, j) for i, j in pairs)
    return 1 - Fraction(u, r) - Fraction(low, r) - Fraction(setting.n_total - q - 1, r)


@dataclass
class RangeReport:
    setting: Setting
    q: int
    status: str                                   # ok | empty | skipped-hypothesis
    lo: int | None = None
    hi: int | None = None
    per_k: dict[int, tuple[int, int]] = field(default_factory=dict)
    rho_lower: Fraction | None = None
    rho_lower_min: Fraction | None = None
    details: str = ""

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.as_dict(),
            "q": self.q,
            "status": self.status,
            "lo": self.lo,
            "hi": self.hi,
            "perK": [{"k": k, "lo": lo, "hi": hi} for k, (lo, hi) in sorted(self.per_k.items())],
            "rhoLower": str(self.rho_lower) if self.rho_lower is not None else None,
            "rhoLowerMin": str(self.rho_lower_min) if self.rho_lower_min is not None else None,
            "details": self.details,
        }


def range_report(setting: Setting, q: int) -> RangeReport:
    if not 1 <= q <= setting.n_total:
        return RangeReport(setting, q, "skipped-hypothesis", details=f"q outside 1..{setting.n_total}")
    failed = thm_c_guards(setting, q)
    if failed:
        return RangeReport(setting, q, "skipped-hypothesis", details="; ".join(failed))
    lo, hi = theorem_a_range(setting, q)
    per_k = {k: per_k_range(setting, q, k) for k in range(q + 1)
             if q - k <= setting.n1 and k <= setting.n2}
    return RangeReport(
        setting, q, "ok" if lo <= hi else "empty", lo, hi, per_k,
        rho_lower_bound(setting, q), rho_lower_bound_min(setting, q),
        details="" if lo <= hi else f"lo={lo} > hi={hi}",
    )


# ------------------------------------------------------------------
#  Witness cocycles
# ------------------------------------------------------------------
@dataclass
class WitnessCocycle:
    setting: Setting
    q: int
    k: int
    factors: list[Monomial]
    payload: Monomial
    route: str                                    # annihilator | lifted | extended | restricted
    optional: list[Monomial] = field(default_factory=list, repr=False)
    flags: dict[str, bool] | None = None

    @property
    def p(self) -> int:
        return len(self.factors)

    @property
    def is_valid(self) -> bool:
        return self.flags == VALID_FLAGS

    def to_dict(self) -> dict:
        flags = self.flags or {"nonzero": None, "cocycle": None, "coboundary": None}
        return {
            "q": self.q,
            "k": self.k,
            "p": self.p,
            "factors": [m.text() for m in self.factors],
            "payload": self.payload.text(),
            "flags": dict(flags),
        }


def _uses_any(m: Monomial, variables: list[Variable]) -> bool:
    return any(m.uses(name, idx) for name, idx in variables)


def _in_subring(m: Monomial, q: int, k: int) -> bool:
    return not any(m.xexp[q - k + 1:]) and not any(m.yexp[k + 1:])


def key_case_guards(setting: Setting, q: int, k: int) -> list[str]:
    """Failed hypotheses of the anchor syzygy at p = δ; empty when it applies."""
    s = setting
    ex, ey = q - k + s.b1, k + s.b2
    failed = []
    if not 0 <= ex < s.d1:
        failed.append(f"0 <= q-k+b1 < d1 ({ex}, d1={s.d1})")
    if not 0 <= ey < s.d2:
        failed.append(f"0 <= k+b2 < d2 ({ey}, d2={s.d2})")
    if not is_cohen_macaulay(s):
        failed.append("d1/d2*b2 - b1 < n1+1 and d2/d1*b1 - b2 < n2+1")
    return failed


def construct_witness(setting: Setting, q: int, k: int, p: int,
                      drop: tuple[Monomial, ...] = (), route: str | None = None) -> WitnessCocycle:
    """
    ζ = m_1 ∧ ... ∧ m_p ⊗ f_{q,k,b}.

    annihilator: L(f) ⊆ Z(f) and #L <= p <= #Z; factors are L(f) then Z(f) - L(f).
    lifted     : p = δ = r_{(q-k,k),d} - (q+1), or lo_k <= p <= hi_k; the first δ
                 annihilator-ideal monomials on x_0..x_{q-k}, y_0..y_k by index
                 degree, then annihilator-ideal monomials using other variables.
    """
    f = build_fqkb(setting, q, k)
    engine = IdealEngine.for_setting(setting)
    if engine.is_in_ideal_brute_force(f):
        raise HypothesisViolation(f"f_{{{q},{k},b}} = {f.text()} vanishes in S̄")
    excluded = set(drop)
    basis = engine.ideal_piece(setting.d).quotient_monomials
    order = {m: i for i, m in enumerate(basis)}

    if route in (None, "annihilator"):
        L, Z = l_set(setting, f), z_set(setting, f)
        in_l = set(L)
        if in_l <= set(Z) and len(L) <= p <= len(Z):
            pool = [m for m in Z if m not in in_l and m not in excluded]
            if len(L) + len(pool) >= p:
                chosen = pool[: p - len(L)]
                factors = sorted(L + chosen, key=order.__getitem__)
                return WitnessCocycle(setting, q, k, factors, f, "annihilator", optional=chosen)
        if route == "annihilator":
            raise RangeEmpty(f"p={p} outside [#L, #Z] = [{len(L)}, {len(Z)}] for f={f.text()}")

    delta = key_case_anchor(setting, q, k)
    if p == delta and not key_case_guards(setting, q, k):
        lo_k, hi_k = delta, delta
    else:
        lo_k, hi_k = per_k_range(setting, q, k)
    variables = linear_annihilator_variables(setting, q, k)
    candidates = sorted(
        (m for m in basis if _in_subring(m, q, k) and _uses_any(m, variables) and m not in excluded),
        key=lambda m: (setting.index_degree(m), order[m]),
    )
    extras = [m for m in basis if not _in_subring(m, q, k) and _uses_any(m, variables) and m not in excluded]
    if not (p == delta or lo_k <= p <= min(hi_k, delta + len(extras))) or len(candidates) < delta:
        raise RangeEmpty(f"no witness at p={p} for (q,k)=({q},{k}); per-k range [{lo_k},{hi_k}], δ={delta}")
    base = candidates[:delta]
    factors = sorted(base + extras[: p - delta], key=order.__getitem__)
    return WitnessCocycle(setting, q, k, factors, f, "lifted", optional=base)



def verify_witness(witness: WitnessCocycle, engine: KoszulEngine | None = None) -> dict[str, bool]:
    """Sets and returns {nonzero, cocycle, coboundary} by direct linear algebra."""
    engine = engine or KoszulEngine(witness.setting, "artinian")
    p, q = witness.p, witness.q
    vec = engine.chain_vector(witness.factors, witness.payload, q)
    nonzero = bool(vec)
    cocycle = not engine.apply_differential(p, q, vec)
    coboundary = True
    if nonzero:
        basis = EchelonBasis(engine.fld)
        keys = {engine.block_key(p, q, index) for index in vec}
        for key in keys:
            for column in engine.boundary_block(p + 1, q - 1, key):
                basis.add(column)
        coboundary = basis.contains(vec)
    witness.flags = {"nonzero": nonzero, "cocycle": cocycle, "coboundary": coboundary}
    logger.debug(f"witness q={q} k={witness.k} p={p} [{witness.route}] -> {witness.flags}")
    return witness.flags


def find_witness(setting: Setting, q: int, k: int, p: int,
                 engine: KoszulEngine | None = None) -> WitnessCocycle:
    """construct_witness + verify_witness, retrying alternative drop sets."""
    engine = engine or KoszulEngine(setting, "artinian")
    first = construct_witness(setting, q, k, p)
    verify_witness(first, engine)
    if first.is_valid:
        return first

    attempts = 0
    for size in (1, 2):
        for drop in itertools.combinations(reversed(first.optional), size):
            if attempts >= CONFIG.witness.MAX_DROP_ATTEMPTS:
                break
            attempts += 1
            try:
                candidate = construct_witness(setting, q, k, p, drop=drop, route=first.route)
            except RangeEmpty:
                continue
            verify_witness(candidate, engine)
            if candidate.is_valid:
                logger.info(f"witness q={q} k={k} p={p} found after dropping {[m.text() for m in drop]}")
                return candidate
    logger.warning(f"no valid witness for q={q} k={k} p={p} after {attempts} alternatives")
    return first


def restrict_witness(witness: WitnessCocycle, i: int, j: int) -> WitnessCocycle:
    """Image of ζ under x_{n1-i+1..n1} = y_{n2-j+1..n2} = 0; OutOfRange if a factor vanishes."""
    restriction: Restriction = IdealEngine.for_setting(witness.setting).restrict_to_subproduct(i, j)
    images = [restriction.project(m) for m in witness.factors + [witness.payload]]
    if any(m is None for m in images):
        raise OutOfRange(f"witness uses variables dropped by the ({i},{j}) restriction")
    target = restriction.target
    basis = IdealEngine.for_setting(target).ideal_piece(target.d).quotient_monomials
    order = {m: pos for pos, m in enumerate(basis)}
    factors = images[:-1]
    if all(m in order for m in factors):
        factors = sorted(factors, key=order.__getitem__)
    return WitnessCocycle(target, witness.q, witness.k, factors, images[-1], "restricted")


def extend_witness(witness: WitnessCocycle, m: Monomial) -> WitnessCocycle:
    """m ∧ ζ, re-sorted into basis order."""
    if m in witness.factors:
        raise RangeEmpty(f"{m.text()} already a factor")
    basis = IdealEngine.for_setting(witness.setting).ideal_piece(witness.setting.d).quotient_monomials
    order = {b: pos for pos, b in enumerate(basis)}
    factors = sorted(witness.factors + [m], key=lambda b: order.get(b, len(order)))
    return WitnessCocycle(witness.setting, witness.q, witness.k, factors, witness.payload, "extended")


def key_case_setting(setting: Setting, q: int, k: int) -> Setting:
    """The sub-product P^{q-k} x P^k with the same d, b, char."""
    _check_qk(setting, q, k)
    return setting.restricted(setting.n1 - (q - k), setting.n2 - k)


def key_case_anchor(setting: Setting, q: int, k: int) -> int:
    """δ = r_{(q-k,k),d} - (q+1)."""
    return binom(setting.d1 + q - k, q - k) * binom(setting.d2 + k, k) - 1 - (q + 1)
