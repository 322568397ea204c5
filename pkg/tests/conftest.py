import time

import numpy as np
import pytest

from hetseg.pipeline import MODELS
from hetseg.selection import CRITERIA
from hetseg.simulation import KSTAR, SimDesign, run_grid

_ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail=""):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def default_grid():
    """The default n=200 grid over every sigma2, all models plus the oracle run
    and the true-K pseudo-criterion. Computed once per session."""
    design = SimDesign(n=200, replications=100, base_seed=2019)
    t0 = time.perf_counter()
    results = run_grid(design, models=MODELS, criteria=CRITERIA + (KSTAR,),
                       oracle_variances=True, record_timing=False)
    return design, results, time.perf_counter() - t0
