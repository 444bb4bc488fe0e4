import numpy as np
import pytest

from eqgeom import make_economy

CONFIGS = [(family, L) for family in ("constant", "tanh-sin", "fold") for L in (3, 5)]

ACCEPTANCE_LINES = {}


@pytest.fixture(params=CONFIGS, ids=[f"{f}-L{L}" for f, L in CONFIGS])
def model(request):
    family, L = request.param
    return make_economy(family, L)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
