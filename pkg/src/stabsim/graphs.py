"""Immutable network representation and exact graph metrics.

The same adjacency structure serves two purposes: algorithms query it for
1-hop neighborhoods only, while verdict code uses the global metrics
(distances, induced diameters, k-balls) as ground truth.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

INF = math.inf

MAX_ID = 2**32 - 1


class GraphError(ValueError):
    """Raised for malformed graph definitions or unknown vertices."""


@dataclass(frozen=True)
class Graph:
    """Connected undirected network with unique integer process identifiers."""

    vertices: frozenset[int]
    edges: frozenset[tuple[int, int]]  # normalized (u, v) with u < v
    adj: dict[int, tuple[int, ...]] = field(compare=False, repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def neighbors_of(self, v: int) -> tuple[int, ...]:
        try:
            return self.adj[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v}") from None


def make_graph(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> Graph:
    """Validate and freeze a graph: connected, n >= 2, simple, 32-bit ids."""
    vlist = list(vertices)
    vset = frozenset(vlist)
    if len(vlist) != len(vset):
        raise GraphError("duplicate vertex identifiers")
    if len(vset) < 2:
        raise GraphError("need at least two processes")
    for v in vset:
        if not isinstance(v, int) or isinstance(v, bool) or not (0 <= v <= MAX_ID):
            raise GraphError(f"identifier {v!r} is not a 32-bit non-negative integer")
    norm = set()
    for u, v in edges:
        if u == v:
            raise GraphError(f"self-loop at {u}")
        if u not in vset or v not in vset:
            raise GraphError(f"edge ({u},{v}) references unknown vertex")
        e = (u, v) if u < v else (v, u)
        if e in norm:
            raise GraphError(f"duplicate edge {e}")
        norm.add(e)
    adj_sets: dict[int, set[int]] = {v: set() for v in vset}
    for u, v in norm:
        adj_sets[u].add(v)
        adj_sets[v].add(u)
    adj = {v: tuple(sorted(adj_sets[v])) for v in vset}
    g = Graph(vset, frozenset(norm), adj)
    if not _connected(g):
        raise GraphError("graph is not connected")
    return g


def _connected(g: Graph) -> bool:
    start = next(iter(g.vertices))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in g.adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(g.vertices)


def neighbors(g: Graph, v: int) -> set[int]:
    """Adjacency set of v."""
    return set(g.neighbors_of(v))


def _bfs_levels(adj, source, allowed=None, cutoff=None):
    levels = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        d = levels[v]
        if cutoff is not None and d >= cutoff:
            continue
        for u in adj[v]:
            if u in levels:
                continue
            if allowed is not None and u not in allowed:
                continue
            levels[u] = d + 1
            queue.append(u)
    return levels


def dist(g: Graph, u: int, v: int) -> int | float:
    """Hop distance between u and v (INF if unreachable)."""
    if u not in g.vertices:
        raise GraphError(f"unknown vertex {u}")
    if v not in g.vertices:
        raise GraphError(f"unknown vertex {v}")
    if u == v:
        return 0
    levels = _bfs_levels(g.adj, u)
    return levels.get(v, INF)


def induced_diameter(g: Graph, s: Iterable[int]) -> int | float:
    """Diameter of the subgraph induced by s; INF if that subgraph is disconnected."""
    sub = frozenset(s)
    if not sub:
        raise GraphError("induced_diameter of empty set")
    for v in sub:
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v}")
    best = 0
    for v in sub:
        levels = _bfs_levels(g.adj, v, allowed=sub)
        if len(levels) != len(sub):
            return INF
        ecc = max(levels.values())
        if ecc > best:
            best = ecc
    return best


def k_neighborhood(g: Graph, v: int, i: int) -> set[int]:
    """The i-ball around v (includes v)."""
    if v not in g.vertices:
        raise GraphError(f"unknown vertex {v}")
    if i < 0:
        raise GraphError("radius must be non-negative")
    return set(_bfs_levels(g.adj, v, cutoff=i))


def diameter(g: Graph) -> int:
    d = induced_diameter(g, g.vertices)
    assert d is not INF  # connectivity validated at construction
    return int(d)


# ---------------------------------------------------------------------------
# loading / saving

def load_graph_json(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    try:
        vertices = payload["vertices"]
        edges = [tuple(e) for e in payload["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph file {path}: {exc}") from exc
    return make_graph(vertices, edges)


def load_graph_edgelist(path: str) -> Graph:
    """One `u v` pair per line; vertex set inferred from endpoints."""
    edges = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: non-integer endpoint") from exc
            edges.append((u, v))
    vertices = {u for e in edges for u in e}
    return make_graph(vertices, edges)


def load_graph(path: str) -> Graph:
    if path.endswith(".json"):
        return load_graph_json(path)
    return load_graph_edgelist(path)


def graph_to_json(g: Graph) -> dict:
    return {
        "vertices": sorted(g.vertices),
        "edges": [list(e) for e in sorted(g.edges)],
    }


# ---------------------------------------------------------------------------
# instance families for experiments

def path_graph(n: int) -> Graph:
    return make_graph(range(1, n + 1), [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    edges = [(i, i + 1) for i in range(1, n)] + [(n, 1)]
    return make_graph(range(1, n + 1), edges)


def grid_graph(rows: int, cols: int) -> Graph:
    def pid(r, c):
        return r * cols + c + 1

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((pid(r, c), pid(r, c + 1)))
            if r + 1 < rows:
                edges.append((pid(r, c), pid(r + 1, c)))
    return make_graph(range(1, rows * cols + 1), edges)


def random_connected_graph(n: int, p: float, seed: int) -> Graph:
    """Random spanning tree plus each remaining pair independently with prob p."""
    rng = random.Random(seed)
    ids = list(range(1, n + 1))
    rng.shuffle(ids)
    edges = set()
    for i in range(1, n):
        j = rng.randrange(i)
        a, b = ids[i], ids[j]
        edges.add((min(a, b), max(a, b)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in edges and rng.random() < p:
                edges.add((i, j))
    return make_graph(range(1, n + 1), edges)
