"""Synthetic graphs and synthetic navigation data.

The hop-biased generator follows the model's own two-step process: draw a hop
distance from the (per-row effective) hop-preference vector, then pick a node
uniformly inside that hop's neighborhood; hop 0 is a uniform jump anywhere.
Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clickstream import NavigationType, TransitionSet
from .graph import Graph
from .khop import ProfileCache
from .models import FittedModel, HopPortationVector, dense_row, hoprank_row_z

DEFAULT_SESSION_LENGTH = 10


class SimulationError(Exception):
    pass


@dataclass
class SynthSpec:
    kind: str  # balanced-binary-tree | random-tree | er-connected
    n: int
    seed: int = 0
    edges: int | None = None  # er-connected only; >= n-1


def _labels(n: int) -> list[str]:
    # single letters for toy sizes, n<idx> beyond
    if n <= 26:
        return [chr(ord("a") + i) for i in range(n)]
    return [f"n{i}" for i in range(n)]


def balanced_binary_tree(n: int) -> Graph:
    if n < 3 or (n + 1) & n != 0:
        raise SimulationError("balanced binary tree needs N = 2^h - 1 nodes")
    edges = [(i, 2 * i + 1) for i in range((n - 1) // 2)]
    edges += [(i, 2 * i + 2) for i in range((n - 1) // 2)]
    return Graph.from_edges(_labels(n), edges)


def random_tree(n: int, seed: int = 0) -> Graph:
    """Uniform random recursive tree: node i attaches to a uniform earlier node."""
    if n < 2:
        raise SimulationError("need at least 2 nodes")
    rng = np.random.default_rng(seed)
    edges = [(i, int(rng.integers(0, i))) for i in range(1, n)]
    return Graph.from_edges(_labels(n), edges)


def er_connected(n: int, edges: int, seed: int = 0) -> Graph:
    """Connected sparse random graph: a random tree plus uniform extra edges."""
    if n < 2:
        raise SimulationError("need at least 2 nodes")
    if edges < n - 1:
        raise SimulationError(f"need at least {n - 1} edges for connectivity")
    rng = np.random.default_rng(seed)
    pairs = {(min(i, p), max(i, p))
             for i, p in ((i, int(rng.integers(0, i))) for i in range(1, n))}
    while len(pairs) < edges:
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return Graph.from_edges(_labels(n), sorted(pairs))


def synth_graph(spec: SynthSpec) -> Graph:
    if spec.kind == "balanced-binary-tree":
        return balanced_binary_tree(spec.n)
    if spec.kind == "random-tree":
        return random_tree(spec.n, spec.seed)
    if spec.kind == "er-connected":
        if spec.edges is None:
            raise SimulationError("er-connected needs an edge count")
        return er_connected(spec.n, spec.edges, spec.seed)
    raise SimulationError(f"unknown graph kind {spec.kind!r}")


def simulate_hoprank(g: Graph, beta, n_steps: int, seed: int, diameter: int,
                     session_length: int = DEFAULT_SESSION_LENGTH,
                     navtype: NavigationType = NavigationType.DC,
                     profiles: ProfileCache | None = None
                     ) -> tuple[TransitionSet, ProfileCache]:
    """Walk the graph under the hop-biased model, restarting at a uniform
    node every ``session_length`` steps. Short hop-preference vectors are
    zero-padded up to the diameter. Returns the transitions and the profile
    cache built along the way (reusable for fitting)."""
    if isinstance(beta, HopPortationVector):
        beta = beta.beta
    beta = HopPortationVector(np.asarray(beta, np.float64)).padded(diameter).beta
    if profiles is None:
        profiles = ProfileCache(g, diameter)
    rng = np.random.default_rng(seed)
    n = g.node_count
    ts = TransitionSet(g)
    cur = int(rng.integers(n))
    in_session = 0
    for _ in range(n_steps):
        if session_length and in_session >= session_length:
            cur = int(rng.integers(n))
            in_session = 0
        prof = profiles.get(cur)
        w = beta * (prof.hop_histogram > 0)
        w[0] = beta[0]  # noise mass is always available
        k = int(rng.choice(len(w), p=w / w.sum()))
        if k == 0:
            nxt = int(rng.integers(n))
        else:
            at_k = prof.nodes_at(k)
            nxt = int(at_k[rng.integers(len(at_k))])
        ts.add(cur, nxt, navtype)
        cur = nxt
        in_session += 1
    return ts, profiles


def simulate_baseline(g: Graph, fm: FittedModel, n_steps: int, seed: int,
                      session_length: int = DEFAULT_SESSION_LENGTH,
                      navtype: NavigationType = NavigationType.DC,
                      profiles: ProfileCache | None = None) -> TransitionSet:
    """Walk the graph sampling each step from the model's dense row; rows are
    cached per visited source."""
    rng = np.random.default_rng(seed)
    n = g.node_count
    ts = TransitionSet(g)
    cdfs: dict[int, np.ndarray] = {}
    cur = int(rng.integers(n))
    in_session = 0
    for _ in range(n_steps):
        if session_length and in_session >= session_length:
            cur = int(rng.integers(n))
            in_session = 0
        cdf = cdfs.get(cur)
        if cdf is None:
            cdf = np.cumsum(dense_row(fm, cur, g, profiles))
            cdfs[cur] = cdf
        nxt = int(np.searchsorted(cdf, rng.random() * cdf[-1]))
        ts.add(cur, nxt, navtype)
        cur = nxt
        in_session += 1
    return ts
