import sys

import pytest

from thoughtprop.graph import ShortestPathProblem, WeightedGraph, generate_dataset


@pytest.fixture
def small_graph():
    return WeightedGraph(5, ((0, 3), (1, 4), (2, 4), (3, 4)), (2, 3, 5, 3))


@pytest.fixture
def small(small_graph):
    return ShortestPathProblem.from_graph("small", small_graph)


@pytest.fixture
def pair_graph():
    # Graph of the worked selection example; its optimum 0 -> 5 is [0, 2, 5].
    edges = ((0, 3), (0, 2), (1, 3), (1, 5), (2, 3), (2, 5), (3, 4), (4, 5))
    dists = (2, 2, 5, 4, 2, 3, 3, 4)
    order = sorted(range(len(edges)), key=lambda i: edges[i])
    return WeightedGraph(6, tuple(edges[i] for i in order), tuple(dists[i] for i in order))


@pytest.fixture
def pair(pair_graph):
    return ShortestPathProblem.from_graph("pair", pair_graph, 0, 5)


@pytest.fixture
def tot_graph():
    edges = ((0, 1), (0, 3), (0, 4), (1, 4), (2, 4), (2, 5), (2, 6), (3, 4))
    dists = (2, 2, 2, 3, 3, 4, 1, 5)
    return WeightedGraph(7, edges, dists)


@pytest.fixture(scope="session")
def seed42():
    return generate_dataset(100, 5, 10, 0.2, 42)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
