from fractions import Fraction
from itertools import combinations

import pytest

from covnet.graph import Graph, Instance, spans


def brute_steiner(graph: Graph, terminals) -> Fraction:
    """Cheapest edge subset connecting ``terminals``, by exhaustive search."""
    terminals = set(terminals)
    if len(terminals) <= 1:
        return Fraction(0)
    edges = [(u, v) for u, v, _ in graph.edges]
    best = None
    for r in range(len(terminals) - 1, len(edges) + 1):
        for subset in combinations(edges, r):
            if spans(graph.n, subset, terminals):
                c = graph.edge_cost(subset)
                if best is None or c < best:
                    best = c
    return best


@pytest.fixture
def path3():
    """Path 0-1-2 with unit costs."""
    return Graph.build(3, [(0, 1, 1), (1, 2, 1)])


@pytest.fixture
def cycle4():
    return Graph.build(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])


@pytest.fixture
def star3():
    return Graph.build(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])


def make(n, edges, groups, packets=None):
    return Instance.build(Graph.build(n, edges), groups, packets)


_CRITERIA: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion with a summary line")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    line = f"{'PASS' if report.passed else 'FAIL'} criterion {number}: {title}"
    _CRITERIA.append(f"{line} [{detail}]" if detail else line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
