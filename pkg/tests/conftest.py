import numpy as np
import pytest

from noisy_pooled import GroundTruth, PoolingGraph

# Hand-drawn 7-agent, 5-query example (0-based agent indices, 4 draws per query).
FIG1_QUERIES = [
    [0, 1, 2, 3],
    [0, 2, 4, 5],
    [1, 1, 2, 6],
    [3, 4, 5, 6],
    [3, 4, 6, 6],
]
FIG1_SIGMA = (1, 0, 1, 0, 1, 0, 0)


@pytest.fixture
def fig1_graph():
    return PoolingGraph(7, np.array(FIG1_QUERIES))


@pytest.fixture
def fig1_truth():
    return GroundTruth(np.array(FIG1_SIGMA))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
