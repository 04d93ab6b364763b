import math

import numpy as np
import pytest

from twomode import dynamics as dyn
from twomode.fock import TwoModeKet

ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])


@pytest.fixture
def acceptance(request):
    """Record the single pass/fail line for one acceptance criterion."""
    store = request.config.stash[ACCEPTANCE_KEY]

    def record(number, title, passed, detail):
        mark = "PASS" if passed else "FAIL"
        store[number] = f"criterion {number:2d} [{mark}] {title}: {detail}"

    return record


def random_ket(rng, dims, sparsity=0.0):
    m = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    if sparsity:
        m[rng.random(dims) < sparsity] = 0
    m /= np.linalg.norm(m)
    return TwoModeKet(m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=[0.0, math.pi / 2, math.pi], ids=["even", "yurke", "odd"])
def unit_scenario(request):
    return dyn.Scenario.build(1.0, request.param)
