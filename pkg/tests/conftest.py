import numpy as np
import pytest

from finslerkit import finsler as fs
from finslerkit import minkowski as mk


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def randers2():
    return mk.catalog("randers", 2, {"b": [0.5, 0.0]})


@pytest.fixture(scope="session")
def randers_exp():
    return fs.catalog("randers-exp", 2)


@pytest.fixture(scope="session")
def riemannian_exp():
    return fs.catalog("riemannian-exp", 2)


def unit(rng, count, n):
    d = rng.normal(size=(count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


# acceptance summary: tests/test_acceptance.py records one line per criterion
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
