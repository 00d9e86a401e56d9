"""Unweighted BFS kernels on CSR adjacency.

Distances are 16-bit hop counts; 0xFFFF marks unreached nodes.
"""

import numpy as np
from numba import njit, prange

UNREACHED = np.uint16(0xFFFF)


@njit(cache=True)
def _bfs_single(indptr, indices, n, src, dist):
    for i in range(n):
        dist[i] = 0xFFFF
    queue = np.empty(n, np.int32)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + np.uint16(1)
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] == 0xFFFF:
                dist[v] = du
                queue[tail] = v
                tail += 1


@njit(cache=True, parallel=True)
def _bfs_batch(indptr, indices, n, sources, out):
    for s in prange(len(sources)):
        _bfs_single(indptr, indices, n, sources[s], out[s])


def bfs_distances(indptr, indices, n, source):
    """Hop distances from one source to all nodes (uint16, 0xFFFF = unreached)."""
    dist = np.empty(n, np.uint16)
    _bfs_single(indptr, indices, n, source, dist)
    return dist


def bfs_distances_batch(indptr, indices, n, sources):
    """Distance matrix (len(sources) x n); rows computed in parallel."""
    sources = np.asarray(sources, np.int64)
    out = np.empty((len(sources), n), np.uint16)
    if len(sources):
        _bfs_batch(indptr, indices, n, sources, out)
    return out
