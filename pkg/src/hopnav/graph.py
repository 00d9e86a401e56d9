"""Immutable undirected simple graph: loading, LCC extraction, exact diameter.

Nodes carry external string labels and dense internal ids 0..N-1 assigned in
first-seen order. Edges are stored undirected and deduplicated; self-edges are
dropped at load.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._bfs import UNREACHED, bfs_distances, bfs_distances_batch


class GraphError(Exception):
    """Invalid graph input or an operation on an unsuitable graph."""


@dataclass
class Graph:
    """Undirected simple graph in CSR form.

    ``indptr``/``indices`` index the sorted neighbor lists; ``labels[i]`` is
    the external identifier of internal node i.
    """

    labels: list[str]
    indptr: np.ndarray
    indices: np.ndarray
    _label_to_id: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._label_to_id:
            self._label_to_id = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        if not 0 <= i < self.node_count:
            raise GraphError(f"node id {i} out of range [0, {self.node_count})")
        return int(self.indptr[i + 1] - self.indptr[i])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, i: int, j: int) -> bool:
        nbrs = self.neighbors(i)
        pos = np.searchsorted(nbrs, j)
        return pos < len(nbrs) and nbrs[pos] == j

    def id_of(self, label: str) -> int | None:
        return self._label_to_id.get(label)

    def content_hash(self) -> str:
        """SHA-256 over labels and the canonical edge list (hex digest)."""
        h = hashlib.sha256()
        for lab in self.labels:
            h.update(lab.encode("utf-8"))
            h.update(b"\x00")
        h.update(self.indptr.astype(np.int64).tobytes())
        h.update(self.indices.astype(np.int32).tobytes())
        return h.hexdigest()

    @classmethod
    def from_edges(cls, labels: list[str], edges) -> "Graph":
        """Build from internal-id edge pairs; dedups and symmetrizes."""
        n = len(labels)
        if n == 0:
            return cls(labels, np.zeros(1, np.int64), np.empty(0, np.int32))
        pairs = {(min(a, b), max(a, b)) for a, b in edges if a != b}
        rows = np.empty(2 * len(pairs), np.int64)
        cols = np.empty(2 * len(pairs), np.int32)
        for t, (a, b) in enumerate(pairs):
            rows[2 * t], cols[2 * t] = a, b
            rows[2 * t + 1], cols[2 * t + 1] = b, a
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(labels, indptr, cols)


def load_edge_list(source, delimiter: str | None = None, comment: str = "#") -> Graph:
    """Parse an edge-list text stream (or path): one edge per line, two label
    fields, ``#`` lines ignored. Duplicate and reversed edges collapse to one.
    """
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        source = open(source, "r", encoding="utf-8")
        close = True
    try:
        labels: list[str] = []
        ids: dict[str, int] = {}
        edges = []
        nlines = 0
        for lineno, raw in enumerate(source, 1):
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            line = raw.strip()
            if not line or line.startswith(comment):
                continue
            nlines += 1
            parts = line.split(delimiter)
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphError(f"line {lineno}: expected two label fields, got {line!r}")
            pair = []
            for lab in parts:
                if lab not in ids:
                    ids[lab] = len(labels)
                    labels.append(lab)
                pair.append(ids[lab])
            edges.append(tuple(pair))
        if nlines == 0:
            raise GraphError("empty edge list")
        return Graph.from_edges(labels, edges)
    finally:
        if close:
            source.close()


def write_edge_list(g: Graph, path) -> None:
    """Export in canonical order: one edge per line, lexicographic labels."""
    lines = sorted(
        "\t".join(sorted((g.labels[i], g.labels[int(j)])))
        for i in range(g.node_count)
        for j in g.neighbors(i)
        if i < j
    )
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


@dataclass
class ComponentMap:
    component_id: np.ndarray  # per node
    sizes: list[int]
    largest: int  # index of the largest component


def connected_components(g: Graph) -> ComponentMap:
    """Label components by BFS; discovery order is increasing minimum node id."""
    n = g.node_count
    comp = np.full(n, -1, np.int64)
    sizes = []
    for start in range(n):
        if comp[start] >= 0:
            continue
        cid = len(sizes)
        comp[start] = cid
        size = 1
        q = deque([start])
        while q:
            u = q.popleft()
            for v in g.neighbors(u):
                if comp[v] < 0:
                    comp[v] = cid
                    size += 1
                    q.append(int(v))
        sizes.append(size)
    # ties resolve to the earliest-discovered component, i.e. smallest min id
    largest = int(np.argmax(sizes)) if sizes else -1
    return ComponentMap(comp, sizes, largest)


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Return the LCC as a new graph plus the old->new id map (-1 = dropped)."""
    if g.node_count == 0:
        raise GraphError("empty graph has no components")
    cm = connected_components(g)
    keep = np.where(cm.component_id == cm.largest)[0]
    mapping = np.full(g.node_count, -1, np.int64)
    mapping[keep] = np.arange(len(keep))
    labels = [g.labels[int(i)] for i in keep]
    edges = [
        (int(mapping[i]), int(mapping[j]))
        for i in keep
        for j in g.neighbors(int(i))
        if i < j
    ]
    return Graph.from_edges(labels, edges), mapping


def is_connected(g: Graph) -> bool:
    if g.node_count == 0:
        return False
    dist = bfs_distances(g.indptr, g.indices, g.node_count, 0)
    return not np.any(dist == UNREACHED)


def exact_diameter(g: Graph, batch: int = 64) -> int:
    """Exact diameter via double-sweep lower bound plus iFUB-style fringe
    refinement: BFS outward-in from a central root, pruning once the bound
    certifies no farther pair can exist.
    """
    n = g.node_count
    if n == 0:
        raise GraphError("empty graph")
    if n == 1:
        return 0
    if not is_connected(g):
        raise GraphError("diameter requires a connected graph; pass the LCC")

    def ecc_from(src):
        return bfs_distances(g.indptr, g.indices, n, src)

    # double sweep: far node from a high-degree seed, then its antipode
    seed = int(np.argmax(g.degrees()))
    d_seed = ecc_from(seed)
    a = int(np.argmax(d_seed))
    d_a = ecc_from(a)
    b = int(np.argmax(d_a))
    d_b = ecc_from(b)
    lb = max(int(d_a.max()), int(d_b.max()))
    # midpoint of an a-b shortest path as the iFUB root
    on_path = np.where(d_a.astype(np.int64) + d_b == d_a[b])[0]
    mid = int(on_path[np.argmin(np.maximum(d_a[on_path], d_b[on_path]))])
    d_mid = ecc_from(mid)
    level = int(d_mid.max())
    while 2 * level > lb:
        fringe = np.where(d_mid == level)[0]
        for off in range(0, len(fringe), batch):
            block = fringe[off:off + batch]
            dmat = bfs_distances_batch(g.indptr, g.indices, n, block)
            lb = max(lb, int(dmat.max()))
        # every unvisited node now sits at depth < level: its eccentricity
        # is at most 2*(level-1)
        if lb >= 2 * (level - 1):
            return lb
        level -= 1
    return lb
