import numpy as np
import pytest

from mrim.graph import Graph

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def hub_graph():
    """Hub 0 reaches 1, 2, 3 with certainty; node 4 is isolated."""
    return Graph.from_edges(5, [0, 0, 0], [1, 2, 3], [1.0, 1.0, 1.0])


@pytest.fixture
def chain_graph():
    """0 -> 1 -> 2 with certainty."""
    return Graph.from_edges(3, [0, 1], [1, 2], [1.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
