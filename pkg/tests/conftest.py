import os

import pytest

from fhtoeplitz.eigensolver import solve
from fhtoeplitz.symbol import FHParams

STUDY = FHParams(1 / 3, -1 / 2)
FLIPPED = FHParams(1 / 3, 1 / 2)
SHIFT = FHParams(0.0, -1.0)

# N = 1000 and 2000 runs take ~30 s in total; FHT_QUICK=1 skips them
QUICK = os.environ.get("FHT_QUICK", "") not in ("", "0")

# PASS/FAIL lines from tests/test_acceptance.py, printed at session end
ACCEPTANCE_LINES: list[str] = []


def pytest_collection_modifyitems(config, items):
    if not QUICK:
        return
    skip = pytest.mark.skip(reason="FHT_QUICK=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def study():
    return STUDY


@pytest.fixture(scope="session")
def decomp():
    """Cached exact decomposition for the study parameters."""
    return lambda N, params=STUDY: solve(params, N)
