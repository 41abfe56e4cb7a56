"""
SyzScan — Main Entry Point
==========================
Command-line front end for the Koszul cohomology engines and the
verification suites.
Usage:
    python main.py betti --n 1,1 --d 1,1                 # Betti table (artinian)
    python main.py betti --n 1,1 --d 2,2 --q 2 --p-window 1,6 --mode both
    python main.py range --n 1,1 --d 3,3 --q 1           # non-vanishing range
    python main.py witness --n 1,1 --d 3,3 --q 2 --k 1 --p 12
    python main.py verify --suite paper                  # acceptance run
    python main.py verify --suite quick --corrupt-forms  # negative control
    python main.py scan-conjecture                       # conjecture-report.json
    python main.py regseq-check --n 1,1 --b 0,2

Exit codes: 0 pass, 1 verification failures, 2 configuration, hypothesis
or report-write error, 3 size limit.
"""

import argparse
import multiprocessing
import sys
from pathlib import Path
from typing import Literal

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config import CONFIG, REPORT_DIR
from errors import ConfigError, SyzygyError
from health_check import check_regularity, regseq_check
from koszul_engine import KoszulEngine
from log_auditor import LogAuditor
from multigrade import Setting
from orchestrator import Orchestrator, exit_code
from witness_engine import find_witness, range_report

COMMANDS = ("betti", "range", "verify", "scan-conjecture", "regseq-check", "witness")

Pair = tuple[int, int]


class JobConfig(BaseModel):
    """One CLI run, validated before any engine is built."""
    model_config = ConfigDict(frozen=True)

    command: Literal["betti", "range", "verify", "scan-conjecture", "regseq-check", "witness"]
    n: Pair = (1, 1)
    d: Pair = (1, 1)
    b: Pair = (0, 0)
    char: int = Field(default=CONFIG.base_field.DEFAULT_CHAR, ge=0)
    mode: Literal["artinian", "raw", "both"] = "artinian"
    p_window: Pair | None = None
    q: list[int] | None = None
    k: int | None = None
    p: int | None = Field(default=None, ge=0)
    size_limit: int = Field(default=CONFIG.strand.SIZE_LIMIT, ge=1)
    bound: int | None = None
    out: Path | None = None
    format: Literal["json", "csv"] = "json"
    suite: Literal["paper", "conjecture", "quick"] = "paper"
    corrupt_forms: bool = False
    threads: int | None = Field(default=None, ge=1)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "JobConfig":
        values = {k: v for k, v in vars(args).items() if v is not None}
        try:
            return cls(**values)
        except ValidationError as e:
            problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            raise ConfigError(problems) from e

    @property
    def setting(self) -> Setting:
        return Setting(*self.n, *self.d, *self.b, self.char)

    def output(self, default: str) -> Path:
        return self.out if self.out is not None else REPORT_DIR / f"{default}.{self.format}"


# ------------------------------------------------------------------
#  Commands
# ------------------------------------------------------------------
def _written(ok: bool, path: Path) -> None:
    if not ok:
        raise ConfigError(f"could not write report to {path}")


def cmd_betti(job: JobConfig, auditor: LogAuditor) -> int:
    s = job.setting
    modes = ("artinian", "raw") if job.mode == "both" else (job.mode,)
    tables = {}
    for mode in modes:
        engine = KoszulEngine(s, mode, job.size_limit)
        table = engine.betti_table(job.p_window, job.q)
        tables[mode] = table
        print(f"\n[{mode}] {s.label}\n{table}\n")
        out = job.output(f"betti_{s.n1}{s.n2}_{s.d1}{s.d2}_{mode}")
        if len(modes) > 1 and job.out is not None:
            out = out.with_name(f"{out.stem}_{mode}{out.suffix}")
        _written(auditor.write_betti(table, out, job.format), out)

    if len(tables) == 2:
        common = set(tables["artinian"].entries) & set(tables["raw"].entries)
        differ = sorted(c for c in common if tables["artinian"].entries[c] != tables["raw"].entries[c])
        if differ:
            logger.error(f"artinian and raw tables differ at {differ}")
            return 1
    if any(t.skipped for t in tables.values()):
        logger.warning("Some cells exceeded the size limit; raise --size-limit to compute them")
        return 3
    return 0


def cmd_range(job: JobConfig, auditor: LogAuditor) -> int:
    s = job.setting
    qs = job.q or list(range(1, s.n_total + 1))
    reports = [range_report(s, q) for q in qs]
    for r in reports:
        span = f"[{r.lo}, {r.hi}]" if r.lo is not None else "-"
        print(f"q={r.q}: {r.status:<18} range {span:<12} rho >= {r.rho_lower}  {r.details}")
    out = job.output(f"range_{s.n1}{s.n2}_{s.d1}{s.d2}")
    _written(auditor.write_range(reports, out, job.format), out)
    return 0


def cmd_witness(job: JobConfig, auditor: LogAuditor) -> int:
    if job.q is None or len(job.q) != 1 or job.k is None or job.p is None:
        raise ConfigError("witness needs --q, --k and --p (single values)")
    s = job.setting
    witness = find_witness(s, job.q[0], job.k, job.p, KoszulEngine(s, "artinian", job.size_limit))
    print(f"ζ = {' ∧ '.join(m.text() for m in witness.factors)} ⊗ {witness.payload.text()}")
    print(f"route: {witness.route}, flags: {witness.flags}")
    out = job.output(f"witness_{s.n1}{s.n2}_{s.d1}{s.d2}_{job.q[0]}{job.k}_{job.p}")
    _written(auditor.write_witness(witness, out, job.format), out)
    return 0 if witness.is_valid else 1


def cmd_verify(job: JobConfig, auditor: LogAuditor) -> int:
    orch = Orchestrator(job.threads)
    records = orch.run_suite(job.suite, job.char, job.corrupt_forms, job.out, job.format)
    return exit_code(records)


def cmd_scan_conjecture(job: JobConfig, auditor: LogAuditor) -> int:
    orch = Orchestrator(job.threads)
    records = orch.run_suite("conjecture", job.char, out=job.out, fmt=job.format)
    return exit_code(records)


def cmd_regseq_check(job: JobConfig, auditor: LogAuditor) -> int:
    s = job.setting
    records = [regseq_check(s, job.bound), check_regularity(s)]
    for r in records:
        print(f"{r.claim:<12} {r.status:<18} {r.details}")
    out = job.output(f"regseq_{s.n1}{s.n2}_{s.d1}{s.d2}_{s.b1}{s.b2}")
    _written(auditor.write_records(records, out, job.format), out)
    return exit_code(records)


HANDLERS = {
    "betti": cmd_betti,
    "range": cmd_range,
    "witness": cmd_witness,
    "verify": cmd_verify,
    "scan-conjecture": cmd_scan_conjecture,
    "regseq-check": cmd_regseq_check,
}


# ------------------------------------------------------------------
#  Argument parsing
# ------------------------------------------------------------------
def _pair(text: str) -> Pair:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers 'a,b', got '{text}'")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'a,b', got '{text}'")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=_pair, help="dimensions n1,n2")
    common.add_argument("--d", type=_pair, help="embedding bidegree d1,d2")
    common.add_argument("--b", type=_pair, help="twist b1,b2 (default 0,0)")
    common.add_argument("--char", type=int, help=f"field characteristic, 0 = rationals (default {CONFIG.base_field.DEFAULT_CHAR})")
    common.add_argument("--mode", choices=("artinian", "raw", "both"))
    common.add_argument("--p-window", dest="p_window", type=_pair, help="p range lo,hi")
    common.add_argument("--q", type=_int_list, help="row(s) q, comma-separated")
    common.add_argument("--k", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--size-limit", dest="size_limit", type=int, help="max strand columns")
    common.add_argument("--bound", type=int, help="regseq-check internal degree bound")
    common.add_argument("--out", type=Path)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--suite", choices=("paper", "conjecture", "quick"))
    common.add_argument("--corrupt-forms", dest="corrupt_forms", action="store_true", default=None,
                        help="negative control: drop a term of g_1")
    common.add_argument("--threads", type=int, help=f"worker cap (default ${CONFIG.hardware.THREADS_ENV} or all cores)")

    parser = argparse.ArgumentParser(description="SyzScan — Koszul cohomology of P^n1 x P^n2")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    auditor = LogAuditor()
    job = None
    try:
        job = JobConfig.from_args(args)
        code = HANDLERS[job.command](job, auditor)
    except SyzygyError as e:
        logger.error(f"{type(e).__name__}: {e}")
        code = e.exit_code
    auditor.write_session_log(args.command, job.model_dump(mode="json") if job else vars(args), {"exit_code": code})
    return code


if __name__ == "__main__":
    multiprocessing.freeze_support()
    sys.exit(main())
