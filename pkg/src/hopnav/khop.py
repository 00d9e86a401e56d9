"""Per-source BFS profiles: hop distances, hop histograms, and lazy rows of
the stochastic k-hop matrices.

A profile for source i is the data behind row i of every M_k (uniform mass
over the nodes at exactly hop k) and row i of the gravitational weight matrix.
Profiles are computed only for sources that actually appear in transition
data; nothing here ever materializes an all-pairs matrix.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._bfs import UNREACHED, bfs_distances, bfs_distances_batch
from .graph import Graph, GraphError

_CACHE_MAGIC = b"HOPPROF1"
_CACHE_VERSION = 1


class KhopError(Exception):
    pass


@dataclass
class SourceProfile:
    """BFS result for one source: distance vector and per-hop node counts."""

    source: int
    dist: np.ndarray  # uint16 hop counts, dist[source] == 0
    hop_histogram: np.ndarray  # |N_k(source)| for k = 0..diameter
    grav_normalizer: float  # sum_l deg(l) / S(source, l)

    def nodes_at(self, k: int) -> np.ndarray:
        return np.where(self.dist == k)[0]


def _grav_normalizer(dist: np.ndarray, source: int, degrees: np.ndarray,
                     diameter: int) -> float:
    # squared-distance weights; the diagonal uses (d'+2)^2 and unreachable
    # nodes (impossible on an LCC) (d'+1)^2
    sp = dist.astype(np.float64)
    sp[dist == UNREACHED] = diameter + 1
    sp[source] = diameter + 2
    return float(np.sum(degrees / (sp * sp)))


def _profile_from_dist(dist: np.ndarray, source: int, g: Graph,
                       diameter: int) -> SourceProfile:
    hist = np.bincount(dist[dist != UNREACHED].astype(np.int64),
                       minlength=diameter + 1)
    if len(hist) > diameter + 1:
        raise KhopError(f"distance {len(hist) - 1} exceeds stated diameter {diameter}")
    norm = _grav_normalizer(dist, source, g.degrees().astype(np.float64), diameter)
    return SourceProfile(source, dist, hist, norm)


def bfs_profile(g: Graph, source: int, diameter: int) -> SourceProfile:
    """Exact single-source BFS profile."""
    if not 0 <= source < g.node_count:
        raise GraphError(f"node id {source} out of range")
    if diameter >= 0xFFFF:
        raise KhopError("diameter must fit in 16-bit hop counts")
    dist = bfs_distances(g.indptr, g.indices, g.node_count, source)
    return _profile_from_dist(dist, source, g, diameter)


def mk_row_mass(profile: SourceProfile, k: int, j: int, diameter: int) -> float:
    """Entry (source, j) of the stochastic k-hop matrix M_k: uniform over the
    nodes at exactly hop k, zero elsewhere."""
    if not 1 <= k <= diameter:
        raise KhopError(f"hop {k} outside 1..{diameter}")
    if profile.dist[j] != k:
        return 0.0
    return 1.0 / float(profile.hop_histogram[k])


class ProfileCache:
    """Profiles keyed by source id, computed on demand or in parallel batches."""

    def __init__(self, g: Graph, diameter: int):
        self.graph = g
        self.diameter = diameter
        self._profiles: dict[int, SourceProfile] = {}

    def __len__(self):
        return len(self._profiles)

    def __contains__(self, source):
        return source in self._profiles

    def sources(self):
        return self._profiles.keys()

    def get(self, source: int) -> SourceProfile:
        p = self._profiles.get(source)
        if p is None:
            p = bfs_profile(self.graph, source, self.diameter)
            self._profiles[source] = p
        return p

    def add_batch(self, sources, batch_size: int = 512) -> None:
        g = self.graph
        todo = sorted(s for s in set(int(s) for s in sources) if s not in self._profiles)
        for off in range(0, len(todo), batch_size):
            block = np.array(todo[off:off + batch_size], np.int64)
            dmat = bfs_distances_batch(g.indptr, g.indices, g.node_count, block)
            for row, src in enumerate(block):
                self._profiles[int(src)] = _profile_from_dist(
                    dmat[row], int(src), g, self.diameter)

    def save(self, path) -> None:
        """Binary cache: versioned header + fixed-width little-endian records,
        keyed by the graph content hash."""
        ghash = bytes.fromhex(self.graph.content_hash())
        n = self.graph.node_count
        with open(path, "wb") as f:
            f.write(_CACHE_MAGIC)
            f.write(struct.pack("<II32sHI", _CACHE_VERSION, n, ghash,
                                self.diameter, len(self._profiles)))
            for src in sorted(self._profiles):
                p = self._profiles[src]
                f.write(struct.pack("<Id", src, p.grav_normalizer))
                f.write(p.dist.astype("<u2").tobytes())

    @classmethod
    def load(cls, path, g: Graph, diameter: int) -> "ProfileCache":
        with open(path, "rb") as f:
            if f.read(8) != _CACHE_MAGIC:
                raise KhopError("not a profile cache file")
            version, n, ghash, d, count = struct.unpack("<II32sHI", f.read(46))
            if version != _CACHE_VERSION:
                raise KhopError(f"unsupported cache version {version}")
            if ghash != bytes.fromhex(g.content_hash()):
                raise KhopError("profile cache does not match this graph")
            if n != g.node_count or d != diameter:
                raise KhopError("profile cache header mismatch")
            cache = cls(g, diameter)
            for _ in range(count):
                src, norm = struct.unpack("<Id", f.read(12))
                dist = np.frombuffer(f.read(2 * n), dtype="<u2").copy()
                hist = np.bincount(dist[dist != UNREACHED].astype(np.int64),
                                   minlength=diameter + 1)
                cache._profiles[src] = SourceProfile(src, dist, hist, norm)
            return cache


def profile_sources(g: Graph, sources, diameter: int,
                    batch_size: int = 512) -> ProfileCache:
    """Profile each distinct source in parallel BFS batches."""
    if diameter >= 0xFFFF:
        raise KhopError("diameter must fit in 16-bit hop counts")
    cache = ProfileCache(g, diameter)
    cache.add_batch(sources, batch_size=batch_size)
    return cache
