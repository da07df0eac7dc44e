import numpy as np
import pytest

from meroindex.geometry import solve_geometric
from meroindex.trimesh import load_fixture

FIXTURES = ["4_1", "4_1_3tet", "5_2", "m011", "6_1", "7_2"]


@pytest.fixture(scope="session")
def fixtures():
    return {name: load_fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def geometric(fixtures):
    out = {}
    for name, (tri, a) in fixtures.items():
        out[name] = solve_geometric(tri, a)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
