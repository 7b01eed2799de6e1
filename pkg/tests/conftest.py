import sys
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fairshed import Instance, PiecewiseConstantUtility  # noqa: E402

# the four-agent, identical-demand example: table of per-hour utilities on [0,1], [1,2]
TABLE = [(F(8, 10), F(2, 10)), (F(2, 10), F(8, 10)), (F(7, 10), F(3, 10)), (F(3, 10), F(7, 10))]


@pytest.fixture
def table_instance():
    return Instance.build(4, [2, 2, 2, 2], TABLE, horizon=2)


@pytest.fixture
def three_unit():
    return Instance.build(2, [1, 1, 1])


@pytest.fixture
def ten_twenty_thirty():
    return Instance.build(30, [10, 20, 30])


def random_utility(rng, horizon=1, max_segments=6, grid=24, allow_zero=False):
    s = int(rng.integers(1, max_segments + 1))
    inner = sorted(rng.choice(np.arange(1, grid), size=s - 1, replace=False)) if s > 1 else []
    T = F(horizon)
    bps = [F(0)] + [T * int(g) / grid for g in inner] + [T]
    lo = 0 if allow_zero else 1
    dens = [F(int(v)) for v in rng.integers(lo, 10, size=s)]
    if sum(dens) == 0:
        dens[0] = F(1)
    return PiecewiseConstantUtility(tuple(bps), tuple(dens)).normalized()


def random_demands(rng, n, supply=10):
    return [F(int(v), 10) for v in rng.integers(5, supply * 10 + 1, size=n)]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in mod.RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
