import numpy as np
import pytest

from mnn_assoc.neural import Network

ACCEPTANCE_LINES = []


def record_acceptance(number, name, passed, detail=""):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def zero_network(sizes, activation="tanh"):
    return Network(
        tuple(sizes),
        [np.zeros((b, a)) for a, b in zip(sizes[:-1], sizes[1:])],
        [np.zeros(b) for b in sizes[1:]],
        (activation,) * (len(sizes) - 1),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20090101)
