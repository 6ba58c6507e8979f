"""Region flow averaging, background motion model, per-seed motion saliency.

A seed's motion is the mean optical flow over its geodesic Voronoi region.
The background motion model collects the flows of the lowest-objectness
seeds; motion saliency is the squared flow distance to the nearest background
vector, normalized so the most contrasting seed scores 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .embedding import SeedSet
from .graph import RegionLabeling

__all__ = ["MotionModel", "region_mean_flow", "background_motion_model", "motion_saliency"]

log = logging.getLogger(__name__)


@dataclass
class MotionModel:
    """Background flow vectors and the saliency normalization factor."""

    background_flows: np.ndarray  # (N_BG, 2)
    background_seeds: np.ndarray  # (N_BG,) seed indices, lowest objectness first
    normalization: float  # max over seeds of squared distance to nearest background flow


def region_mean_flow(regions: RegionLabeling, flow: np.ndarray) -> np.ndarray:
    """Mean flow vector per region, (n_seeds, 2).

    Every region is non-empty (it contains at least its own seed pixel).
    """
    flow = np.asarray(flow, dtype=np.float64)
    labels = regions.labels
    if flow.shape[:2] != labels.shape or flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(
            f"flow shape {flow.shape} does not match labeling {labels.shape} + 2 channels"
        )
    n = regions.n_regions
    flat = labels.ravel()
    sums = np.stack(
        [
            np.bincount(flat, weights=flow[:, :, 0].ravel(), minlength=n),
            np.bincount(flat, weights=flow[:, :, 1].ravel(), minlength=n),
        ],
        axis=1,
    )
    counts = np.maximum(regions.counts, 1)
    return sums / counts[:, None]


def background_motion_model(seeds: SeedSet, flows: np.ndarray, n_background: int) -> MotionModel:
    """Model background motion from the flows of the lowest-objectness seeds.

    Objectness ties break toward the lower seed index. The normalization is
    the largest squared distance from any seed's flow to its nearest
    background flow; zero means no motion contrast exists in the frame.
    """
    if len(seeds) == 0:
        raise ValueError("seed set is empty")
    if n_background < 1:
        raise ValueError(f"n_background must be >= 1, got {n_background}")
    flows = np.asarray(flows, dtype=np.float64)
    n_bg = min(n_background, len(seeds))
    order = np.argsort(seeds.objectness, kind="stable")
    bg_idx = order[:n_bg]
    bg_flows = flows[bg_idx]
    z = float(np.max(_min_sq_dist(flows, bg_flows)))
    if z == 0.0:
        log.warning(
            "all region flows coincide with the background model; motion saliency disabled"
        )
    return MotionModel(background_flows=bg_flows, background_seeds=bg_idx, normalization=z)


def motion_saliency(flows: np.ndarray, model: MotionModel) -> np.ndarray:
    """Per-seed saliency in [0, 1]: normalized squared distance to the model.

    Zero normalization (no motion contrast) yields all-zero saliency.
    """
    flows = np.asarray(flows, dtype=np.float64)
    if model.normalization == 0.0:
        return np.zeros(len(flows))
    return _min_sq_dist(flows, model.background_flows) / model.normalization


def _min_sq_dist(flows: np.ndarray, references: np.ndarray) -> np.ndarray:
    diff = flows[:, None, :] - references[None, :, :]
    return np.min(np.sum(diff**2, axis=-1), axis=1)
