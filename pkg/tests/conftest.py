import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import ideal_engine  # noqa: E402
from config import CONFIG  # noqa: E402
from ideal_engine import IdealEngine  # noqa: E402
from koszul_engine import KoszulEngine  # noqa: E402
from multigrade import Setting  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def no_disk_cache():
    """Quotient bases stay in memory so tests never read a stale cache."""
    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(ideal_engine, "CONFIG", replace(CONFIG, cache=replace(CONFIG.cache, ENABLED=False)))
        IdealEngine.clear_registry()
        yield
        IdealEngine.clear_registry()


@pytest.fixture
def quadric() -> Setting:
    return Setting(1, 1)


@pytest.fixture
def cubic() -> Setting:
    """n=(1,1), d=(3,3): r=15, thirteen degree-d basis monomials."""
    return Setting(1, 1, 3, 3)


@pytest.fixture
def cubic_engine(cubic) -> KoszulEngine:
    return KoszulEngine(cubic, "artinian")
