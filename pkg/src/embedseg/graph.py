"""The 4-neighbor embedding graph and its two distance computations.

Vertices are pixels; edge weights are Euclidean distances between the
embeddings of adjacent pixels. Two queries drive the segmenter:

* geodesic Voronoi labeling (:func:`assign_regions`): each pixel joins the
  seed with the smallest sum-of-weights shortest-path distance;
* bottleneck distances (:func:`bottleneck_distances`): minimum over paths of
  the maximum edge weight, used to grow the initial foreground region.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

__all__ = ["PixelGraph", "RegionLabeling", "build_graph", "assign_regions", "bottleneck_distances"]


@dataclass
class PixelGraph:
    """4-neighbor pixel lattice with nonnegative edge weights.

    ``horizontal[r, c]`` joins (r, c) and (r, c+1); ``vertical[r, c]`` joins
    (r, c) and (r+1, c). Weights are stored as float32; distance relaxations
    compare and propagate them exactly (max/min introduce no rounding).
    """

    height: int
    width: int
    horizontal: np.ndarray  # (H, W-1) float32
    vertical: np.ndarray  # (H-1, W) float32
    _adjacency: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def flat_index(self, pixels: np.ndarray) -> np.ndarray:
        pixels = np.atleast_2d(np.asarray(pixels))
        return pixels[:, 0] * self.width + pixels[:, 1]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All undirected edges as flat-index arrays (u, v, weight)."""
        h, w = self.height, self.width
        idx = np.arange(h * w).reshape(h, w)
        us = []
        vs = []
        ws = []
        if w > 1:
            us.append(idx[:, :-1].ravel())
            vs.append(idx[:, 1:].ravel())
            ws.append(self.horizontal.ravel())
        if h > 1:
            us.append(idx[:-1, :].ravel())
            vs.append(idx[1:, :].ravel())
            ws.append(self.vertical.ravel())
        if not us:
            z = np.zeros(0, dtype=np.intp)
            return z, z, np.zeros(0, dtype=np.float32)
        return np.concatenate(us), np.concatenate(vs), np.concatenate(ws)

    def csr(self) -> sp.csr_matrix:
        """Directed CSR with both orientations of every edge, float64 weights."""
        u, v, w = self.edge_arrays()
        n = self.n_pixels
        return sp.csr_matrix(
            (
                np.concatenate([w, w]).astype(np.float64),
                (np.concatenate([u, v]), np.concatenate([v, u])),
            ),
            shape=(n, n),
        )

    def adjacency(self) -> tuple[list, list, list]:
        """CSR-style (indptr, neighbor indices, weights) over flat pixels.

        Returned as plain Python lists: the priority-queue relaxation indexes
        them in a tight loop where list access beats ndarray scalar access.
        """
        if self._adjacency is None:
            u, v, w = self.edge_arrays()
            n = self.n_pixels
            src = np.concatenate([u, v])
            dst = np.concatenate([v, u])
            wt = np.concatenate([w, w]).astype(np.float64)
            order = np.argsort(src, kind="stable")
            src, dst, wt = src[order], dst[order], wt[order]
            indptr = np.zeros(n + 1, dtype=np.intp)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._adjacency = (indptr.tolist(), dst.tolist(), wt.tolist())
        return self._adjacency


def build_graph(embedding: np.ndarray) -> PixelGraph:
    """Build the 4-neighbor graph with Euclidean embedding distances as weights."""
    emb = np.asarray(embedding, dtype=np.float64)
    if emb.ndim != 3:
        raise ValueError(f"embedding map must be (H, W, E), got shape {emb.shape}")
    h, w, _ = emb.shape
    horizontal = np.sqrt(np.sum((emb[:, 1:] - emb[:, :-1]) ** 2, axis=-1)).astype(np.float32)
    vertical = np.sqrt(np.sum((emb[1:] - emb[:-1]) ** 2, axis=-1)).astype(np.float32)
    return PixelGraph(height=h, width=w, horizontal=horizontal, vertical=vertical)


@dataclass
class RegionLabeling:
    """Per-pixel seed index and per-region pixel counts."""

    labels: np.ndarray  # (H, W) int32
    counts: np.ndarray  # (n_seeds,) int64

    @property
    def n_regions(self) -> int:
        return len(self.counts)


def assign_regions(graph: PixelGraph, seed_pixels: np.ndarray) -> RegionLabeling:
    """Label each pixel with the seed of smallest geodesic (sum) distance.

    ``seed_pixels`` is (S, 2) int (row, col). Ties resolve to the lowest seed
    index. One single-source Dijkstra runs per seed; the argmin over the
    resulting distance rows implements the tie rule via first occurrence.
    """
    seed_pixels = np.atleast_2d(np.asarray(seed_pixels))
    if len(seed_pixels) == 0:
        raise ValueError("seed set is empty")
    sources = graph.flat_index(seed_pixels)
    dist = _csgraph_dijkstra(graph.csr(), directed=True, indices=sources)
    labels = np.argmin(dist, axis=0).astype(np.int32).reshape(graph.height, graph.width)
    counts = np.bincount(labels.ravel(), minlength=len(sources)).astype(np.int64)
    return RegionLabeling(labels=labels, counts=counts)


def bottleneck_distances(graph: PixelGraph, source_pixels: np.ndarray) -> np.ndarray:
    """Minimax distance from every pixel to the nearest source.

    The cost of a path is its maximum edge weight; the distance is the minimum
    over all paths from any source. Computed by priority-queue relaxation with
    max-cost propagation; comparisons are exact (values are input weights).
    Returns an (H, W) float32 map, 0 at sources.
    """
    source_pixels = np.atleast_2d(np.asarray(source_pixels))
    if len(source_pixels) == 0:
        raise ValueError("source set is empty")
    indptr, neighbors, weights = graph.adjacency()
    n = graph.n_pixels
    dist = [np.inf] * n
    sources = np.unique(graph.flat_index(source_pixels))
    heap = []
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, int(s)))
    heapq.heapify(heap)
    push, pop = heapq.heappush, heapq.heappop
    while heap:
        d, u = pop(heap)
        if d > dist[u]:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = neighbors[k]
            nd = weights[k]
            if nd < d:
                nd = d
            if nd < dist[v]:
                dist[v] = nd
                push(heap, (nd, v))
    return np.asarray(dist, dtype=np.float64).reshape(graph.height, graph.width).astype(np.float32)
