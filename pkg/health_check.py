"""
Health Check
============
Pass/fail checks for the verification suites.

  - HealthCheck: pre-flight (free memory, disk space, cache directory).
  - VerificationRecord: one (instance, claim) outcome.
  - check_* functions: each claim the suites verify. Domain errors never
    escape a check; they become skipped-hypothesis, skipped-size or fail.
"""

from __future__ import annotations

import uuid
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import psutil
from loguru import logger

from config import CACHE_DIR, CONFIG
from errors import HypothesisViolation, OutOfRange, RangeEmpty, SizeLimitExceeded, SyzygyError
from ideal_engine import IdealEngine, vanishing_clauses
from koszul_engine import (
    KoszulEngine, is_cohen_macaulay, kunneth_regularity_vanishing, regularity_vanishing_holds,
)
from multigrade import Monomial, Setting, product_cohomology
from witness_engine import (
    build_fqkb, build_tilde_f, construct_witness, extend_witness, find_witness, key_case_anchor, key_case_setting,
    l_set, linear_annihilator_variables, range_report, restrict_witness, rho_lower_bound, tilde_f_relations,
    verify_witness, z_set,
)

STATUSES = ("pass", "fail", "skipped-hypothesis", "skipped-size")

QUADRIC_TABLE = {(0, 0): 1, (1, 1): 1}


@dataclass
class HealthReport:
    passed: bool
    details: dict


class HealthCheck:
    def __init__(self):
        self.config = CONFIG.health

    def check_memory(self) -> bool:
        try:
            free_gb = psutil.virtual_memory().available / (1024**3)
            return free_gb >= self.config.MIN_FREE_MEMORY_GB
        except Exception:
            return False

    def check_disk_space(self) -> bool:
        """Ensures enough free space for the quotient cache and reports."""
        try:
            free_gb = psutil.disk_usage(str(CACHE_DIR)).free / (1024**3)
            return free_gb >= self.config.MIN_DISK_FREE_GB
        except Exception:
            return False

    def check_cache_writable(self) -> bool:
        probe = CACHE_DIR / f".probe_{uuid.uuid4().hex}"
        try:
            probe.write_text("ok")
            probe.unlink()
            return True
        except OSError:
            return False

    def run(self) -> HealthReport:
        logger.info("Running system health checks...")
        report = {}
        all_passed = True

        mem_ok = self.check_memory()
        report["memory"] = "OK" if mem_ok else f"FAIL (< {self.config.MIN_FREE_MEMORY_GB}GB free)"
        if not mem_ok:
            all_passed = False

        disk_ok = self.check_disk_space()
        report["disk"] = "OK" if disk_ok else f"FAIL (< {self.config.MIN_DISK_FREE_GB}GB free)"
        if not disk_ok:
            all_passed = False

        cache_ok = self.check_cache_writable()
        report["cache_dir"] = "OK" if cache_ok else f"FAIL ({CACHE_DIR} not writable)"
        if not cache_ok:
            all_passed = False

        final_status = "PASSED" if all_passed else "FAILED"
        if all_passed:
            logger.success(f"Health Check: {final_status}")
        else:
            logger.error(f"Health Check: {final_status} - {report}")
        return HealthReport(passed=all_passed, details=report)


# ------------------------------------------------------------------
#  Verification records
# ------------------------------------------------------------------
@dataclass
class VerificationRecord:
    instance: str
    claim: str
    status: str
    details: str = ""
    conjectural: bool = False

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status '{self.status}'")

    @property
    def failed(self) -> bool:
        """A failure that gates the run; conjectural results never do."""
        return self.status == "fail" and not self.conjectural

    def to_dict(self) -> dict:
        return asdict(self)


def instance_id(setting: Setting, **extra: int) -> str:
    s = setting
    out = f"n={s.n1},{s.n2} d={s.d1},{s.d2} b={s.b1},{s.b2}"
    if s.char != CONFIG.base_field.DEFAULT_CHAR:
        out += f" char={s.char}"
    for name, value in extra.items():
        out += f" {name}={value}"
    return out


Outcome = tuple[str, str]


def _record(instance: str, claim: str, check: Callable[[], Outcome],
            conjectural: bool = False) -> VerificationRecord:
    try:
        status, details = check()
    except HypothesisViolation as exc:
        status, details = "skipped-hypothesis", str(exc)
    except SizeLimitExceeded as exc:
        status, details = "skipped-size", str(exc)
    except SyzygyError as exc:
        status, details = "fail", f"{type(exc).__name__}: {exc}"
    record = VerificationRecord(instance, claim, status, details, conjectural)
    log = logger.warning if record.failed else logger.debug
    log(f"[{claim}] {instance}: {status} {details}")
    return record


def _ideal(setting: Setting, corrupt: bool) -> IdealEngine:
    return IdealEngine.corrupted(setting) if corrupt else IdealEngine.for_setting(setting)


def _first(items: list, limit: int = 5) -> str:
    shown = ", ".join(str(i) for i in items[:limit])
    return shown + (f" (+{len(items) - limit} more)" if len(items) > limit else "")


# ------------------------------------------------------------------
#  Betti tables
# ------------------------------------------------------------------
def check_quadric(setting: Setting, corrupt: bool = False) -> VerificationRecord:
    """K_{0,0} = K_{1,1} = 1 and nothing else for p <= 3, in both modes."""
    def run() -> Outcome:
        problems = []
        for mode in ("artinian", "raw"):
            ideal = _ideal(setting, corrupt) if mode == "artinian" else None
            table = KoszulEngine(setting, mode, ideal=ideal).betti_table(
                (0, 3), range(setting.n_total + CONFIG.strand.BETTI_Q_EXTRA + 1))
            if table.skipped:
                return "skipped-size", f"{mode}: {len(table.skipped)} cells over the size limit"
            if table.nonzero() != QUADRIC_TABLE:
                problems.append(f"{mode}: {table.nonzero()}")
        return ("fail", "; ".join(problems)) if problems else ("pass", "{(0,0):1, (1,1):1} in both modes")
    return _record(instance_id(setting), "quadric", run)


def check_artinian_equivalence(setting: Setting, corrupt: bool = False) -> VerificationRecord:
    """Reduced and raw K_{p,q} agree on every cell both modes can afford."""
    def run() -> Outcome:
        reduced = KoszulEngine(setting, "artinian", ideal=_ideal(setting, corrupt))
        raw = KoszulEngine(setting, "raw")
        agree, skipped, mismatches = 0, 0, []
        for q in range(setting.n_total + CONFIG.strand.BETTI_Q_EXTRA + 1):
            for p in range(CONFIG.suite.RAW_P_MAX + 1):
                try:
                    a, b = reduced.kpq_dim(p, q), raw.kpq_dim(p, q)
                except SizeLimitExceeded:
                    skipped += 1
                    continue
                if a == b:
                    agree += 1
                else:
                    mismatches.append(f"K_{p},{q}: {a} vs raw {b}")
        if mismatches:
            return "fail", _first(mismatches)
        if not agree:
            return "skipped-size", f"all {skipped} cells over the size limit"
        return "pass", f"{agree} cells agree, {skipped} over the size limit"
    return _record(instance_id(setting), "cor-artinian", run)


def check_euler_characteristic(setting: Setting, corrupt: bool = False) -> VerificationRecord:
    def run() -> Outcome:
        engine = KoszulEngine(setting, "artinian", ideal=_ideal(setting, corrupt))
        table = engine.betti_table()
        diagonals = engine.euler_characteristic_check(table)
        bad = [f"w={w}: {c} vs {b}" for w, (c, b) in diagonals.items() if c != b]
        if bad:
            return "fail", _first(bad)
        if not diagonals:
            return "skipped-size", "no diagonal fully computed"
        return "pass", f"{len(diagonals)} diagonals balance"
    return _record(instance_id(setting), "euler", run)


# ------------------------------------------------------------------
#  Non-vanishing ranges
# ------------------------------------------------------------------
def _certify_by_witness(setting: Setting, q: int, p: int, engine: KoszulEngine) -> str | None:
    """The (k, route) of a verified witness in K_{p,q}, or None when no construction verifies."""
    for k in range(q + 1):
        if q - k > setting.n1 or k > setting.n2:
            continue
        for route in ("annihilator", "lifted"):
            try:
                witness = construct_witness(setting, q, k, p, route=route)
                verify_witness(witness, engine)
            except (RangeEmpty, HypothesisViolation, OutOfRange, SizeLimitExceeded):
                continue
            if witness.is_valid:
                return f"k={k} {route}"
    return None


def check_range(setting: Setting, q: int, corrupt: bool = False) -> list[VerificationRecord]:
    """
    thmA: K_{p,q} >= 1 for every p in the range. Cells too large for a full
    computation are certified by a verified witness cocycle instead.
    rho-bound: the nonzero cells found over [lo-1, hi+1] already give
    rho_q >= rho_lower_bound(q).
    """
    instance = instance_id(setting, q=q)
    report = range_report(setting, q)
    if report.status == "skipped-hypothesis":
        return [VerificationRecord(instance, claim, "skipped-hypothesis", report.details)
                for claim in ("thmA", "rho-bound")]

    state: dict = {}

    def thm_a() -> Outcome:
        if report.status == "empty":
            state["table"] = None
            return "pass", f"empty range ({report.details})"
        engine = KoszulEngine(setting, "artinian", ideal=_ideal(setting, corrupt))
        table = engine.betti_table((max(report.lo - 1, 0), report.hi + 1), [q])
        state["table"] = table
        zeros = [p for p in range(report.lo, report.hi + 1) if table.get(p, q) == 0]
        if zeros:
            return "fail", f"K_{{p,{q}}} = 0 for p in {_first(zeros)} inside [{report.lo},{report.hi}]"
        witnessed: dict[int, str] = {}
        missing = []
        state["witnessed"] = witnessed
        for p in range(report.lo, report.hi + 1):
            if table.get(p, q) is not None:
                continue
            route = _certify_by_witness(setting, q, p, engine)
            if route is None:
                missing.append(p)
            else:
                witnessed[p] = route
        by_witness = f", {len(witnessed)} by witness" if witnessed else ""
        if missing:
            return "skipped-size", f"p in {_first(missing)} over the size limit; rest nonzero{by_witness}"
        return "pass", f"K_{{p,{q}}} != 0 for p in [{report.lo},{report.hi}]{by_witness}"

    def rho_bound() -> Outcome:
        table = state.get("table")
        witnessed = state.get("witnessed", {})
        found = sum(1 for v in table.row(q).values() if v) if table is not None else 0
        found += len(witnessed)
        estimate = Fraction(found, setting.r_nd)
        bound = rho_lower_bound(setting, q)
        if estimate >= bound:
            return "pass", f"rho_{q} >= {found}/{setting.r_nd} >= {bound}"
        if table is not None and any(qq == q and p not in witnessed for p, qq in table.skipped):
            return "skipped-size", f"{found}/{setting.r_nd} < {bound} with cells skipped"
        return "fail", f"{found}/{setting.r_nd} < {bound}"

    first = _record(instance, "thmA", thm_a)
    if "table" not in state:
        return [first, VerificationRecord(instance, "rho-bound", first.status, first.details)]
    return [first, _record(instance, "rho-bound", rho_bound)]


# ------------------------------------------------------------------
#  Tri-degree vanishing and the conjecture scan (d = (1,1))
# ------------------------------------------------------------------
def tri_degree_dims(n1: int, n2: int, char: int | None = None) -> dict[tuple[int, int, int], int]:
    """dim S̄_{a,k} for 0 <= a1 <= n2+1, 0 <= a2 <= n1+1, 0 <= k <= a1 n1 + a2 n2."""
    setting = Setting(n1, n2, char=CONFIG.base_field.DEFAULT_CHAR if char is None else char)
    engine = IdealEngine.for_setting(setting)
    dims = {}
    for a1 in range(n2 + 2):
        for a2 in range(n1 + 2):
            for k in range(a1 * n1 + a2 * n2 + 1):
                dims[(a1, a2, k)] = engine.quotient_piece_dim((a1, a2), k)
    return dims


def check_tri_degree_vanishing(n1: int, n2: int,
                               dims: dict[tuple[int, int, int], int] | None = None) -> VerificationRecord:
    def run() -> Outcome:
        table = dims if dims is not None else tri_degree_dims(n1, n2)
        bad = []
        for (a1, a2, k), dim in table.items():
            if vanishing_clauses(n1, n2, (a1, a2), k) & {1, 2, 3} and dim:
                bad.append(f"a=({a1},{a2}) k={k}: dim {dim}")
            if 1 <= a1 <= n2 and 1 <= a2 <= n1 and k == a1 * a2 and dim != 1:
                bad.append(f"a=({a1},{a2}) k={k}: dim {dim} != 1")
        if bad:
            return "fail", _first(bad)
        return "pass", f"{len(table)} cells"
    return _record(instance_id(Setting(n1, n2)), "tridegvanish", run)


def scan_conjecture(n1: int, n2: int) -> list[VerificationRecord]:
    """Proven clauses gate; clause 4 and the converse are archived as conjectural."""
    instance = instance_id(Setting(n1, n2))
    dims = tri_degree_dims(n1, n2)

    def clause_4() -> Outcome:
        bad = []
        for (a1, a2, k), dim in dims.items():
            held = vanishing_clauses(n1, n2, (a1, a2), k)
            if 4 in held and dim:
                bad.append(f"a=({a1},{a2}) k={k}: dim {dim}")
            if not held and k == a1 * n1 + (n2 - a1) * a2 and dim != 1:
                bad.append(f"a=({a1},{a2}) k={k}: dim {dim} != 1")
        return ("fail", _first(bad)) if bad else ("pass", f"{len(dims)} cells")

    def converse() -> Outcome:
        bad = [f"a=({a1},{a2}) k={k}" for (a1, a2, k), dim in dims.items()
               if dim == 0 and not vanishing_clauses(n1, n2, (a1, a2), k)]
        return ("fail", f"zero without a clause at {_first(bad)}") if bad else ("pass", f"{len(dims)} cells")

    return [
        check_tri_degree_vanishing(n1, n2, dims),
        _record(instance, "conj-4", clause_4, conjectural=True),
        _record(instance, "conj-iff", converse, conjectural=True),
    ]


# ------------------------------------------------------------------
#  Membership oracles
# ------------------------------------------------------------------
def random_monomial(setting: Setting, rng: np.random.Generator, max_degree: tuple[int, int]) -> Monomial:
    a1 = int(rng.integers(0, max_degree[0] + 1))
    a2 = int(rng.integers(0, max_degree[1] + 1))
    xexp = rng.multinomial(a1, [1 / (setting.n1 + 1)] * (setting.n1 + 1))
    yexp = rng.multinomial(a2, [1 / (setting.n2 + 1)] * (setting.n2 + 1))
    return Monomial(tuple(int(e) for e in xexp), tuple(int(e) for e in yexp))


def check_membership(setting: Setting, samples: int | None = None, seed: int | None = None,
                     corrupt: bool = False) -> VerificationRecord:
    """Brute-force and modular-path membership agree on random monomials."""
    samples = CONFIG.suite.MEMBERSHIP_SAMPLES if samples is None else samples
    seed = CONFIG.suite.MEMBERSHIP_SEED if seed is None else seed

    def run() -> Outcome:
        engine = _ideal(setting, corrupt)
        rng = np.random.default_rng(seed)
        cap = (3 * setting.d1, 3 * setting.d2)
        members, disagree = 0, []
        for _ in range(samples):
            m = random_monomial(setting, rng, cap)
            brute = engine.is_in_ideal_brute_force(m)
            members += brute
            if brute != engine.is_in_ideal_modular_path(m):
                disagree.append(m.text())
        if disagree:
            return "fail", f"{len(disagree)} disagreements: {_first(disagree)}"
        return "pass", f"{samples} samples (seed {seed}), {members} in the ideal"
    return _record(instance_id(setting), "oracle-membership", run)


# ------------------------------------------------------------------
#  Witnesses
# ------------------------------------------------------------------
def check_annihilators(setting: Setting, q: int, k: int) -> VerificationRecord:
    """f_{q,k,b} != 0, its annihilator variables kill it, L(f) ⊆ Z(f), #Z(f) >= δ in the key case."""
    def run() -> Outcome:
        engine = IdealEngine.for_setting(setting)
        f = build_fqkb(setting, q, k)
        if engine.is_in_ideal_brute_force(f):
            return "fail", f"f = {f.text()} vanishes"
        survivors = [f"{name}{i}" for name, i in linear_annihilator_variables(setting, q, k)
                     if not engine.is_in_ideal_brute_force(Monomial.variable(setting.n1, setting.n2, name, i) * f)]
        if survivors:
            return "fail", f"{_first(survivors)} do not annihilate {f.text()}"
        L, Z = l_set(setting, f), z_set(setting, f)
        outside = [m.text() for m in L if m not in set(Z)]
        if outside:
            return "fail", f"L(f) not in Z(f): {_first(outside)}"
        details = f"f={f.text()} #L={len(L)} #Z={len(Z)}"
        if setting.n == (q - k, k):
            anchor = key_case_anchor(setting, q, k)
            if len(Z) < anchor:
                return "fail", f"{details} < δ={anchor}"
            details += f" δ={anchor}"
        return "pass", details
    return _record(instance_id(setting, q=q, k=k), "prop-annihilator", run)


def check_witnesses(setting: Setting, q: int, k: int) -> VerificationRecord:
    """Valid witnesses at p = #L(f) and p = δ, each under its own hypotheses."""
    claim = "thm-special" if setting.n == (q - k, k) else "witness"

    def run() -> Outcome:
        f = build_fqkb(setting, q, k)
        delta = key_case_anchor(setting, q, k)
        koszul = KoszulEngine(setting, "artinian")
        found, missing, outside = [], [], []
        for p in sorted({len(l_set(setting, f)), delta}):
            try:
                witness = find_witness(setting, q, k, p, koszul)
            except HypothesisViolation as exc:
                outside.append(f"p={p}: {exc}")
                continue
            except RangeEmpty as exc:
                missing.append(f"p={p}: {exc}")
                continue
            if witness.is_valid:
                found.append(f"p={p} [{witness.route}]")
            else:
                missing.append(f"p={p}: {witness.flags}")
        if missing:
            return "fail", "; ".join(missing)
        if not found:
            raise HypothesisViolation("; ".join(outside))
        return "pass", ", ".join(found + [f"skipped {o}" for o in outside])
    return _record(instance_id(setting, q=q, k=k), claim, run)


def check_restriction(setting: Setting, q: int, k: int) -> VerificationRecord:
    """
    Lifting and extension of the anchor syzygy. The ring S̄ modulo the
    variables outside P^{q-k} x P^k matches the key-case ring; the anchor
    witness at p = δ restricts to a valid key-case witness and is valid itself;
    wedging it with one more annihilator keeps it valid.
    """
    def run() -> Outcome:
        small = key_case_setting(setting, q, k)
        i, j = setting.n1 - small.n1, setting.n2 - small.n2
        if (i, j) == (0, 0):
            raise HypothesisViolation(f"{setting.label} is already the key case of (q,k)=({q},{k})")
        ideal = IdealEngine.for_setting(setting)
        dropped, reference = ideal.modulo_last_variables(i, j), IdealEngine.for_setting(small)
        for a in (setting.d, setting.shift(q)):
            if dropped.quotient_piece_dim(a) != reference.quotient_piece_dim(a):
                return "fail", f"quotient by the dropped variables differs from {small.label} in bidegree {a}"

        koszul = KoszulEngine(setting, "artinian")
        witness = construct_witness(setting, q, k, key_case_anchor(setting, q, k), route="lifted")
        restricted = restrict_witness(witness, i, j)
        verify_witness(restricted)
        verify_witness(witness, koszul)
        if not restricted.is_valid:
            return "fail", f"restriction to {small.label}: {restricted.flags}"
        if not witness.is_valid:
            return "fail", f"restriction valid but the lifted witness is {witness.flags}"
        details = f"p={witness.p} restricts to {small.label}"

        annihilators = linear_annihilator_variables(setting, q, k)
        basis = ideal.ideal_piece(setting.d).quotient_monomials
        extra = next((m for m in basis if m not in witness.factors
                      and any(m.uses(name, v) for name, v in annihilators)), None)
        if extra is not None:
            bigger = extend_witness(witness, extra)
            verify_witness(bigger, koszul)
            if not bigger.is_valid:
                return "fail", f"{details}; {extra.text()} ∧ ζ is {bigger.flags}"
            details += f"; {extra.text()} ∧ ζ valid at p={bigger.p}"
        return "pass", details
    return _record(instance_id(setting, q=q, k=k), "lem-lift", run)


def check_tilde_f(n1: int, n2: int, max_q: int) -> VerificationRecord:
    """The four recursion identities for every valid (q, k) with q <= max_q."""
    setting = Setting(n1, n2)

    def run() -> Outcome:
        bad, checked = [], 0
        for q in range(max_q + 1):
            for k in range(q + 1):
                if q - k > n1 or k > n2:
                    continue
                for name, ok in tilde_f_relations(setting, q, k).items():
                    checked += 1
                    if not ok:
                        bad.append(f"(q,k)=({q},{k}) {name}")
        if n1 >= 3 and n2 >= 2 and max_q >= 5:
            sample = build_tilde_f(setting, 5, 2).text()
            if sample != "x2*x3*y0^2*y1":
                bad.append(f"f~_5,2 = {sample}")
        return ("fail", _first(bad)) if bad else ("pass", f"{checked} identities")
    return _record(instance_id(setting, q=max_q), "ftilde", run)


# ------------------------------------------------------------------
#  Regular sequence and regularity
# ------------------------------------------------------------------
def regseq_kernels(setting: Setting, bound: int | None = None) -> list[tuple[int, int, int]]:
    """
    (t, k, dim) for every nonzero kernel of multiplication by g_t on
    (S(b;d) / (g_0..g_{t-1}))_k, over internal degrees k up to the bound.
    """
    s = setting
    bound = s.n_total + CONFIG.regseq.DEGREE_BOUND_OFFSET if bound is None else bound
    engine = IdealEngine.for_setting(s)
    k_min = max(-(s.b1 // s.d1), -(s.b2 // s.d2))
    kernels = []
    for t in range(s.n_total + 1):
        for k in range(k_min, bound + 1):
            source, target = s.shift(k), s.shift(k + 1)
            if min(source) < 0:
                continue
            before = s.piece_dim(source) - engine.partial_ideal_dim(source, t)
            image = engine.partial_ideal_dim(target, t + 1) - engine.partial_ideal_dim(target, t)
            if before - image:
                kernels.append((t, k, before - image))
    return kernels


def regseq_check(setting: Setting, bound: int | None = None) -> VerificationRecord:
    """Degreewise regularity of g_0..g_|n| on S(b;d), cross-checked with the CM inequalities."""
    bound = setting.n_total + CONFIG.regseq.DEGREE_BOUND_OFFSET if bound is None else bound

    def run() -> Outcome:
        cm = is_cohen_macaulay(setting)
        kernels = regseq_kernels(setting, bound)
        if kernels:
            t, k, dim = kernels[0]
            found = f"kernel of g_{t} in internal degree {k} (dim {dim})"
            return ("fail", f"CM but {found}") if cm else ("pass", f"not CM; {found}")
        if cm:
            return "pass", f"injective for every t up to internal degree {bound}"
        return "pass", f"not CM; no kernel found <= {bound}, regularity not asserted"
    return _record(instance_id(setting), "regseq", run)


def check_regularity(setting: Setting) -> VerificationRecord:
    """The vanishing inequalities imply the Kunneth vanishing, and h^i lives in {0, n1, n2, |n|}."""
    def run() -> Outcome:
        s = setting
        if regularity_vanishing_holds(s) and not kunneth_regularity_vanishing(s):
            return "fail", "inequalities hold but some h^i(O(d + (|n|-i)b)) != 0"
        allowed = {0, s.n1, s.n2, s.n_total}
        reach = s.n_total + CONFIG.regseq.DEGREE_BOUND_OFFSET
        for a1 in range(-reach, reach + 1):
            for a2 in range(-reach, reach + 1):
                degrees = set(product_cohomology(s.n1, s.n2, a1, a2))
                if not degrees <= allowed:
                    return "fail", f"h^i(O({a1},{a2})) nonzero for i in {sorted(degrees - allowed)}"
        return "pass", f"inequalities {'hold' if regularity_vanishing_holds(s) else 'fail'}; Kunneth consistent"
    return _record(instance_id(setting), "regularity", run)
