import math

import numpy as np
import pytest

from cotp import qcore


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


@pytest.fixture
def ghz():
    layout = qcore.SystemLayout.of(("A", 2), ("B", 2), ("E", 2))
    v = np.zeros(8)
    v[0] = v[7] = 1 / math.sqrt(2)
    return qcore.PureState(layout, v).to_density()


@pytest.fixture
def bell():
    layout = qcore.SystemLayout.of(("A", 2), ("B", 2))
    return qcore.PureState(layout, ket(1, 0, 0, 1)).to_density()


def random_abe(seed, dims=(2, 2, 2), rank=None):
    layout = qcore.SystemLayout(tuple(zip("ABE", dims)))
    return qcore.random_density(layout, rank, seed=seed)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
