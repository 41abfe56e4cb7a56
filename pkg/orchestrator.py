"""
Orchestrator
============
Coordinates a verification suite:
1. Health Check
2. Task grid (instances x claims) for the chosen suite
3. Worker pool -- one task per instance, records merged by (instance, claim)
4. Report (Auditor) -- deterministic JSON under reports/
5. Console summary

Suites: paper (every acceptance claim), conjecture (the tri-degree scan,
written to its own report) and quick (a small smoke subset).
"""

import multiprocessing
import os
import time

import pandas as pd
from loguru import logger
from tqdm import tqdm

from config import CONFIG, REPORT_DIR
from errors import ConfigError
from health_check import (
    HealthCheck, VerificationRecord, check_annihilators, check_artinian_equivalence,
    check_euler_characteristic, check_membership, check_quadric, check_range, check_regularity,
    check_restriction, check_tilde_f, check_tri_degree_vanishing, check_witnesses, regseq_check, scan_conjecture,
)
from log_auditor import LogAuditor
from multigrade import Setting
from witness_engine import key_case_setting

SUITES = ("paper", "conjecture", "quick")

# task = (kind, n, d, b, char, corrupt, extra)
Task = tuple


# ------------------------------------------------------------------
#  Worker (module level so the pool can pickle it)
# ------------------------------------------------------------------
def _setting(task: Task) -> Setting:
    _, n, d, b, char, _, _ = task
    return Setting(n[0], n[1], d[0], d[1], b[0], b[1], char)


def _run(task: Task) -> list[VerificationRecord]:
    kind, n, _, _, _, corrupt, extra = task
    if kind == "quadric":
        return [check_quadric(_setting(task), corrupt)]
    if kind == "cor-artinian":
        return [check_artinian_equivalence(_setting(task), corrupt)]
    if kind == "euler":
        return [check_euler_characteristic(_setting(task), corrupt)]
    if kind == "range":
        return check_range(_setting(task), extra[0], corrupt)
    if kind == "membership":
        samples, seed = extra
        return [check_membership(_setting(task), samples, seed, corrupt)]
    if kind == "annihilator":
        return [check_annihilators(_setting(task), *extra)]
    if kind == "witness":
        return [check_witnesses(_setting(task), *extra)]
    if kind == "restriction":
        return [check_restriction(_setting(task), *extra)]
    if kind == "ftilde":
        return [check_tilde_f(n[0], n[1], extra[0])]
    if kind == "tridegvanish":
        return [check_tri_degree_vanishing(n[0], n[1])]
    if kind == "conjecture":
        return scan_conjecture(n[0], n[1])
    if kind == "regseq":
        return [regseq_check(_setting(task)), check_regularity(_setting(task))]
    raise ValueError(f"unknown task kind '{kind}'")


def verify_worker(task: Task) -> list[VerificationRecord]:
    try:
        return _run(task)
    except Exception as e:
        kind, n, d, b, _, _, extra = task
        instance = f"n={n[0]},{n[1]} d={d[0]},{d[1]} b={b[0]},{b[1]} {extra}"
        logger.error(f"[{kind}] {instance} crashed: {e}")
        return [VerificationRecord(instance, kind, "fail", f"{type(e).__name__}: {e}")]


# ------------------------------------------------------------------
#  Task grids
# ------------------------------------------------------------------
def _valid_qk(n: tuple[int, int]) -> list[tuple[int, int]]:
    return [(q, k) for q in range(1, n[0] + n[1] + 1) for k in range(q + 1) if q - k <= n[0] and k <= n[1]]


def _small_products(max_total: int) -> list[tuple[int, int]]:
    return [(n1, n2) for n1 in range(1, max_total) for n2 in range(1, max_total - n1 + 1)]


def build_tasks(suite: str, char: int | None = None, corrupt: bool = False) -> list[Task]:
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    cfg = CONFIG.suite
    char = CONFIG.base_field.DEFAULT_CHAR if char is None else char
    zero = (0, 0)
    tasks: set[Task] = set()

    def add(kind, n, d=(1, 1), b=zero, extra=()):
        tasks.add((kind, tuple(n), tuple(d), tuple(b), char, corrupt, tuple(extra)))

    if suite == "conjecture":
        for n in _small_products(CONFIG.scan.MAX_N_TOTAL):
            add("conjecture", n)
        return sorted(tasks)

    if suite == "quick":
        add("quadric", (1, 1))
        for d in ((1, 1), (2, 1)):
            add("cor-artinian", (1, 1), d)
            add("euler", (1, 1), d)
        for q in (1, 2):
            add("range", (1, 1), cfg.KEY_CASE_D, extra=(q,))
        for q, k in _valid_qk((1, 1)):
            add("annihilator", (1, 1), cfg.KEY_CASE_D, extra=(q, k))
            add("witness", (1, 1), cfg.KEY_CASE_D, extra=(q, k))
        for n in _small_products(3):
            add("tridegvanish", n)
        add("membership", (1, 1), (2, 2), extra=(cfg.QUICK_SAMPLES, cfg.MEMBERSHIP_SEED))
        add("ftilde", (2, 2), extra=(4,))
        add("regseq", (1, 1))
        return sorted(tasks)

    for n, d, b in cfg.QUADRIC:
        add("quadric", n, d, b)
    for n, d, b in cfg.ARTINIAN_GRID:
        add("cor-artinian", n, d, b)
        add("euler", n, d, b)
        add("regseq", n, d, b)
    for n, d, b, qs in cfg.RANGE_GRID:
        add("regseq", n, d, b)
        for q in qs:
            add("range", n, d, b, (q,))
        for q, k in _valid_qk(n):
            add("annihilator", n, d, b, (q, k))
            add("witness", n, d, b, (q, k))
            if 0 < k < q and n != (q - k, k):
                add("restriction", n, d, b, (q, k))
    # key cases P^{q-k} x P^k, cut out of P^m x P^m
    m = cfg.KEY_CASE_MAX_Q
    ambient = Setting(m, m, *cfg.KEY_CASE_D)
    for q in range(2, m + 1):
        for k in range(1, q):
            small = key_case_setting(ambient, q, k)
            add("annihilator", small.n, small.d, small.b, (q, k))
            add("witness", small.n, small.d, small.b, (q, k))
    for n in _small_products(CONFIG.scan.MAX_N_TOTAL):
        add("tridegvanish", n)
    for n in cfg.MEMBERSHIP_N:
        for d in cfg.MEMBERSHIP_D:
            add("membership", n, d, extra=(cfg.MEMBERSHIP_SAMPLES, cfg.MEMBERSHIP_SEED))
    add("ftilde", cfg.TILDE_F_N, extra=(cfg.TILDE_F_MAX_Q,))
    return sorted(tasks)


def exit_code(records: list[VerificationRecord]) -> int:
    """1 on a gating failure, else 3 when a claim was skipped on size, else 0."""
    if any(r.failed for r in records):
        return 1
    if any(r.status == "skipped-size" and not r.conjectural for r in records):
        return 3
    return 0


# ------------------------------------------------------------------
#  Orchestrator
# ------------------------------------------------------------------
class Orchestrator:
    def __init__(self, threads: int | None = None):
        self.hardware = CONFIG.hardware
        self.auditor = LogAuditor()
        self.health = HealthCheck()
        self.threads = threads

    @property
    def workers(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        cap = os.environ.get(self.hardware.THREADS_ENV)
        cores = self.hardware.CPU_CORES
        return max(1, min(cores, int(cap))) if cap and cap.isdigit() else cores

    def dispatch(self, tasks: list[Task], desc: str = "verify") -> list[VerificationRecord]:
        records: list[VerificationRecord] = []
        workers = min(self.workers, len(tasks))
        if workers <= 1:
            for task in tqdm(tasks, desc=desc, disable=len(tasks) < 2):
                records.extend(verify_worker(task))
        else:
            logger.info(f"Dispatching {len(tasks)} tasks to {workers} workers...")
            with multiprocessing.Pool(processes=workers) as pool:
                for batch in tqdm(pool.imap_unordered(verify_worker, tasks), total=len(tasks), desc=desc):
                    records.extend(batch)
        return sorted(records, key=lambda r: (r.instance, r.claim))

    def run_suite(self, suite: str = "paper", char: int | None = None, corrupt: bool = False,
                  out=None, fmt: str = "json", progress_callback=None) -> list[VerificationRecord]:
        start_time = time.time()

        def report(msg, pct=None):
            logger.info(msg)
            if progress_callback:
                progress_callback(msg, pct)

        report(f"Suite '{suite}'{' with corrupted forms' if corrupt else ''}: pre-flight...", 5)
        health = self.health.run()
        if not health.passed:
            logger.warning(f"Continuing despite failed health check: {health.details}")

        tasks = build_tasks(suite, char, corrupt)
        report(f"{len(tasks)} tasks queued.", 10)
        records = self.dispatch(tasks, desc=suite)
        report(f"{len(records)} records collected.", 90)

        if out is None:
            name = CONFIG.scan.REPORT_NAME if suite == "conjecture" else f"verify-{suite}.{fmt}"
            out = REPORT_DIR / name
        written = self.auditor.write_records(records, out, fmt)

        elapsed = time.time() - start_time
        self._print_summary(suite, records, elapsed)
        if not written:
            raise ConfigError(f"could not write the suite report to {out}")
        report(f"Suite '{suite}' completed in {elapsed:.2f}s.", 100)
        return records

    def _print_summary(self, suite: str, records: list[VerificationRecord], elapsed: float):
        print("\n" + "=" * 80)
        print(f" VERIFICATION SUMMARY - SUITE '{suite.upper()}'")
        print("=" * 80)
        frame = pd.DataFrame([r.to_dict() for r in records], columns=["instance", "claim", "status", "details", "conjectural"])
        print(f"Records: {len(records)} in {elapsed:.2f}s")
        if not frame.empty:
            counts = frame.groupby(["claim", "status"]).size().unstack(fill_value=0)
            print("-" * 80)
            print(counts.to_string())
            gating = frame[(frame.status == "fail") & ~frame.conjectural]
            print("-" * 80)
            if gating.empty:
                print("No gating failures.")
            else:
                print("FAILURES")
                gating = gating.assign(details=gating.details.str.slice(0, 60))
                print(gating[["instance", "claim", "details"]].to_string(index=False))
            sized = frame[(frame.status == "skipped-size") & ~frame.conjectural]
            if not sized.empty:
                print(f"SKIPPED ON SIZE ({len(sized)}, exit code 3 unless something failed)")
                print(sized[["instance", "claim"]].to_string(index=False))
            conj = frame[frame.conjectural]
            if not conj.empty:
                print("-" * 80)
                print("CONJECTURAL (archived, not gating)")
                print(conj[["instance", "claim", "status"]].to_string(index=False))
        print("=" * 80 + "\n")


if __name__ == "__main__":
    multiprocessing.freeze_support()
    orch = Orchestrator()
    orch.run_suite("quick")
