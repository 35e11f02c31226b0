"""Shared test fixtures and independent reference oracles.

The reference distance oracle is Floyd-Warshall, deliberately a different
algorithm from the BFS used by the library, so metric expectations are
computed along an independent path.
"""

from __future__ import annotations

import math

import pytest

from stabsim.graphs import Graph, cycle_graph, make_graph, path_graph


def floyd_warshall(g: Graph) -> dict[tuple[int, int], float]:
    nodes = sorted(g.vertices)
    d = {(u, v): (0 if u == v else math.inf) for u in nodes for v in nodes}
    for u, v in g.edges:
        d[(u, v)] = d[(v, u)] = 1
    for w in nodes:
        for u in nodes:
            duw = d[(u, w)]
            if duw is math.inf:
                continue
            for v in nodes:
                alt = duw + d[(w, v)]
                if alt < d[(u, v)]:
                    d[(u, v)] = alt
    return d


def fw_induced_diameter(g: Graph, s) -> float:
    sub = sorted(s)
    edges = [(u, v) for u, v in g.edges if u in s and v in s]
    d = {(u, v): (0 if u == v else math.inf) for u in sub for v in sub}
    for u, v in edges:
        d[(u, v)] = d[(v, u)] = 1
    for w in sub:
        for u in sub:
            for v in sub:
                alt = d[(u, w)] + d[(w, v)]
                if alt < d[(u, v)]:
                    d[(u, v)] = alt
    return max(d.values()) if sub else 0


@pytest.fixture
def p3() -> Graph:
    return path_graph(3)


@pytest.fixture
def p4() -> Graph:
    return path_graph(4)


@pytest.fixture
def p5() -> Graph:
    return path_graph(5)


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture
def c6() -> Graph:
    return cycle_graph(6)


@pytest.fixture
def single_edge() -> Graph:
    return make_graph([5, 9], [(5, 9)])
