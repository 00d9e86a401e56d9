import io
from collections import deque

import numpy as np
import pytest

from hopnav import Graph, load_edge_list

TOY_EDGES = "a b\na c\nb d\nb e\nc f\nc g\n"


@pytest.fixture
def toy_tree() -> Graph:
    """Balanced binary tree of 7 nodes: a on top, b/c below, d/e/f/g leaves."""
    return load_edge_list(io.StringIO(TOY_EDGES))


def naive_bfs(g: Graph, source: int) -> np.ndarray:
    """Independent pure-python BFS oracle (no shared kernel code)."""
    dist = np.full(g.node_count, -1, np.int64)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(int(v))
    return dist


def naive_diameter(g: Graph) -> int:
    """All-pairs maximum eccentricity by per-source numpy frontier BFS."""
    n = g.node_count
    best = 0
    for s in range(n):
        dist = np.full(n, -1, np.int64)
        dist[s] = 0
        frontier = [s]
        level = 0
        while frontier:
            level += 1
            nxt = []
            for u in frontier:
                for v in g.neighbors(u):
                    if dist[v] < 0:
                        dist[v] = level
                        nxt.append(int(v))
            frontier = nxt
        best = max(best, int(dist.max()))
    return best


def random_connected_graph(rng: np.random.Generator, n: int,
                           extra_edges: int = 0) -> Graph:
    """Seeded connected graph: random attachment tree plus extra edges."""
    pairs = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    for _ in range(extra_edges):
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    labels = [f"n{i}" for i in range(n)]
    return Graph.from_edges(labels, sorted(pairs))
