"""
SyzScan — Central Configuration
===============================
All tunable thresholds, size limits, verification grids and system
constants live here. No magic numbers anywhere else in the codebase.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

# ────────────────────────────────────────────────────────────
#  Paths
# ────────────────────────────────────────────────────────────
PROJECT_ROOT = Path(__file__).resolve().parent
LOG_DIR = PROJECT_ROOT / "logs"
CACHE_DIR = PROJECT_ROOT / ".cache"
REPORT_DIR = PROJECT_ROOT / "reports"

# Ensure dirs exist at import time
LOG_DIR.mkdir(exist_ok=True)
CACHE_DIR.mkdir(exist_ok=True)
REPORT_DIR.mkdir(exist_ok=True)


# ────────────────────────────────────────────────────────────
#  Hardware Profile
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class HardwareProfile:
    """Worker pool sizing. SYZ_THREADS caps the pool."""
    CPU_CORES: int = os.cpu_count() or 1
    THREADS_ENV: str = "SYZ_THREADS"
    MAX_MEMORY_GB: float = 16.0         # advisory ceiling for one suite


# ────────────────────────────────────────────────────────────
#  Field
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class FieldConfig:
    DEFAULT_CHAR: int = 32003           # 0 = exact rationals


# ────────────────────────────────────────────────────────────
#  Linear Algebra
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class LinalgConfig:
    """Dense vs sparse elimination switches."""
    DENSE_PIECE_LIMIT: int = 4096       # graded piece dim for dense RREF
    FILL_IN_FACTOR: float = 5.0         # sparse -> dense when nnz grows past this
    DENSE_FALLBACK_MAX_CELLS: int = 25_000_000
    DENSE_MAX_CHAR: int = 2**31         # int64 products stay exact below this


# ────────────────────────────────────────────────────────────
#  Koszul Strands
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class StrandConfig:
    SIZE_LIMIT: int = 200_000           # max columns per grading block
    ENUMERATION_LIMIT: int = 2_000_000  # max strand columns enumerated for a full K_{p,q}
    BLOCK_SEARCH_LIMIT: int = 3_000_000 # search nodes when locating a single block
    COMPLEX_CHECK_MAX_COLS: int = 5_000 # dout·din = 0 verified below this
    BETTI_Q_EXTRA: int = 1              # rows 0..|n|+1


# ────────────────────────────────────────────────────────────
#  Witnesses
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class WitnessConfig:
    MAX_DROP_ATTEMPTS: int = 64         # alternative drop sets in find_witness


# ────────────────────────────────────────────────────────────
#  Regular Sequence Check
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class RegSeqConfig:
    DEGREE_BOUND_OFFSET: int = 3        # internal degree k <= |n| + offset


# ────────────────────────────────────────────────────────────
#  Conjecture Scan
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class ScanConfig:
    MAX_N_TOTAL: int = 6                # n1 + n2 <= this
    REPORT_NAME: str = "conjecture-report.json"


# ────────────────────────────────────────────────────────────
#  Cache
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class CacheConfig:
    ENABLED: bool = True
    QUOTIENT_TTL: int = 30 * 86_400     # 30 days
    CACHE_SIZE_LIMIT_GB: float = 2.0    # max disk cache size


# ────────────────────────────────────────────────────────────
#  Health Check
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class HealthCheckConfig:
    MIN_DISK_FREE_GB: float = 0.5
    MIN_FREE_MEMORY_GB: float = 0.5


# ────────────────────────────────────────────────────────────
#  Verification Suites
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class SuiteConfig:
    """Instances are (n, d, b) triples; q-lists attach to range instances."""
    QUADRIC: tuple = (((1, 1), (1, 1), (0, 0)),)
    ARTINIAN_GRID: tuple = (
        ((1, 1), (1, 1), (0, 0)),
        ((1, 1), (2, 1), (0, 0)),
        ((1, 1), (2, 2), (0, 0)),
        ((1, 2), (1, 1), (0, 0)),
    )
    RANGE_GRID: tuple = (
        ((1, 1), (3, 3), (0, 0), (1, 2)),
        ((1, 1), (4, 3), (0, 0), (1, 2)),
        ((1, 2), (3, 3), (0, 0), (1, 2, 3)),
    )
    KEY_CASE_D: tuple = (3, 3)
    KEY_CASE_MAX_Q: int = 3
    MEMBERSHIP_N: tuple = ((1, 1), (1, 2), (2, 2))
    MEMBERSHIP_D: tuple = ((2, 2), (3, 2))
    MEMBERSHIP_SAMPLES: int = 1000
    MEMBERSHIP_SEED: int = 20240601
    TILDE_F_N: tuple = (3, 3)
    TILDE_F_MAX_Q: int = 6
    RAW_P_MAX: int = 6
    QUICK_SAMPLES: int = 50


# ────────────────────────────────────────────────────────────
#  Assembled Config (single import point)
# ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class AppConfig:
    hardware: HardwareProfile = field(default_factory=HardwareProfile)
    base_field: FieldConfig = field(default_factory=FieldConfig)
    linalg: LinalgConfig = field(default_factory=LinalgConfig)
    strand: StrandConfig = field(default_factory=StrandConfig)
    witness: WitnessConfig = field(default_factory=WitnessConfig)
    regseq: RegSeqConfig = field(default_factory=RegSeqConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    health: HealthCheckConfig = field(default_factory=HealthCheckConfig)
    suite: SuiteConfig = field(default_factory=SuiteConfig)


# Singleton — import this everywhere
CONFIG = AppConfig()
