"""Embedding-space primitives: similarity, edge map, candidates, diverse seeds.

Pixels carrying similar instance embeddings score near 1 under
:func:`similarity`; the :func:`edge_map` is high where the embedding field is
discontinuous (object boundaries). Seed proposal avoids those discontinuities
(:func:`candidate_points`) and then greedily picks an embedding-diverse subset
(:func:`sample_diverse_seeds`), starting from the most object-like candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.spatial.distance import cdist
from scipy.special import expit

__all__ = [
    "SeedSet",
    "similarity",
    "similarity_from_sqdist",
    "similarity_matrix",
    "edge_map",
    "candidate_points",
    "sample_diverse_seeds",
]


def similarity_from_sqdist(sq_dist):
    """Similarity 2 / (1 + exp(d2)) for squared embedding distance(s) d2."""
    return 2.0 * expit(-np.asarray(sq_dist, dtype=np.float64))


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Similarity between two embedding vectors, in (0, 1]; 1 iff a == b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"embedding dimensions differ: {a.shape} vs {b.shape}")
    d2 = np.sum((a - b) ** 2)
    return float(similarity_from_sqdist(d2))


def similarity_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise similarities between rows of ``a`` (N, E) and ``b`` (M, E)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"embedding dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return similarity_from_sqdist(cdist(a, b, "sqeuclidean"))


def edge_map(embedding: np.ndarray) -> np.ndarray:
    """Per-pixel embedding discontinuity: max over 4-neighbors of 1 - similarity.

    Border pixels use only in-bounds neighbors. Values lie in [0, 1). A pixel
    with no neighbors (degenerate 1x1 map) scores 0.
    """
    emb = np.asarray(embedding, dtype=np.float64)
    if emb.ndim != 3:
        raise ValueError(f"embedding map must be (H, W, E), got shape {emb.shape}")
    h, w, _ = emb.shape
    c = np.zeros((h, w), dtype=np.float64)
    if w > 1:
        d2 = np.sum((emb[:, 1:] - emb[:, :-1]) ** 2, axis=-1)
        inv = 1.0 - similarity_from_sqdist(d2)
        np.maximum(c[:, :-1], inv, out=c[:, :-1])
        np.maximum(c[:, 1:], inv, out=c[:, 1:])
    if h > 1:
        d2 = np.sum((emb[1:] - emb[:-1]) ** 2, axis=-1)
        inv = 1.0 - similarity_from_sqdist(d2)
        np.maximum(c[:-1], inv, out=c[:-1])
        np.maximum(c[1:], inv, out=c[1:])
    return c


def candidate_points(edge: np.ndarray, window: int = 9) -> np.ndarray:
    """Pixels that minimize the edge map over an n x n window centered on them.

    The window is clipped at image borders; ties admit every attaining pixel.
    Returns (N, 2) int array of (row, col) in row-major order.
    """
    if window % 2 == 0 or window < 3:
        raise ValueError(f"window size must be odd and >= 3, got {window}")
    edge = np.asarray(edge, dtype=np.float64)
    if edge.ndim == 3 and edge.shape[2] == 1:
        edge = edge[:, :, 0]
    if edge.ndim != 2:
        raise ValueError(f"edge map must be (H, W), got shape {edge.shape}")
    # 'nearest' replication only repeats values already inside the clipped
    # window, so the filtered minimum equals the clipped-window minimum.
    local_min = minimum_filter(edge, size=window, mode="nearest")
    return np.argwhere(edge == local_min)


@dataclass
class SeedSet:
    """Seeds for one frame, ordered by selection; parallel arrays per seed."""

    frame: int
    pixels: np.ndarray  # (N, 2) int (row, col)
    embeddings: np.ndarray  # (N, E) float32
    objectness: np.ndarray  # (N,) float

    def __len__(self) -> int:
        return len(self.pixels)


def sample_diverse_seeds(
    candidates: np.ndarray,
    embedding: np.ndarray,
    objectness: np.ndarray,
    n_seeds: int = 100,
    frame: int = 0,
) -> SeedSet:
    """Greedy diversity sampling of up to ``n_seeds`` seeds from candidates.

    The first seed is the candidate with the largest objectness; each later
    seed minimizes the maximum similarity to everything already selected.
    Ties break toward the lowest row-major pixel index, so the result is
    deterministic. Stops early when candidates run out.
    """
    candidates = np.asarray(candidates)
    if len(candidates) == 0:
        raise ValueError("candidate set is empty")
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds}")
    rows, cols = candidates[:, 0], candidates[:, 1]
    cand_emb = np.asarray(embedding, dtype=np.float64)[rows, cols]
    cand_obj = np.asarray(objectness, dtype=np.float64)[rows, cols]

    n_total = min(n_seeds, len(candidates))
    chosen = np.empty(n_total, dtype=np.intp)
    chosen[0] = np.argmax(cand_obj)
    # Max similarity from each candidate to the selected set so far.
    max_sim = similarity_matrix(cand_emb, cand_emb[chosen[0] : chosen[0] + 1])[:, 0]
    max_sim[chosen[0]] = np.inf
    for k in range(1, n_total):
        nxt = int(np.argmin(max_sim))
        chosen[k] = nxt
        sim = similarity_matrix(cand_emb, cand_emb[nxt : nxt + 1])[:, 0]
        np.maximum(max_sim, sim, out=max_sim)
        max_sim[nxt] = np.inf

    emb = np.asarray(embedding)
    return SeedSet(
        frame=frame,
        pixels=candidates[chosen].astype(np.int64),
        embeddings=emb[rows[chosen], cols[chosen]],
        objectness=np.asarray(objectness)[rows[chosen], cols[chosen]].astype(np.float64),
    )
