"""Synthetic feature sequences with known ground truth, plus brute-force oracles.

Scenes are flat-embedding regions (background plus rectangular/disk objects)
with Gaussian per-pixel noise, rendered into the same embedding/objectness/
flow/RGB stack the segmenter consumes. Everything is driven by a named,
seedable generator (NumPy ``default_rng`` / PCG64, one spawned stream per
frame) so a spec plus seed reproduces a sequence bit-for-bit.

The exhaustive-path and per-seed-Dijkstra oracles used by the test suite live
here too; they are deliberately naive and independent of the fast
implementations in :mod:`embedseg.graph`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .graph import PixelGraph
from .store import (
    FeatureFrame,
    FrameEntry,
    Sequence,
    SequenceManifest,
    save_manifest,
    save_mask,
    save_rgb,
    save_tensor,
)

__all__ = [
    "ObjectSpec",
    "SceneSpec",
    "SyntheticSequence",
    "generate_sequence",
    "write_sequence",
    "clean_preset",
    "drift_preset",
    "ranking_preset",
    "PRESETS",
    "oracle_minimax",
    "oracle_geodesic",
]


@dataclass
class ObjectSpec:
    """One scene object: a flat embedding region following a linear trajectory.

    ``position`` is the top-left corner (rect) or center (disk) on frame 0;
    ``velocity`` its per-frame displacement (rows, cols). Static objects must
    have zero velocity; they ride the background flow. ``stuff`` marks moving
    texture (water, smoke) that is excluded from the ground truth.
    """

    name: str
    shape: str  # "rect" | "disk"
    position: tuple[float, float]
    size: tuple[int, int] | float  # (h, w) for rect, radius for disk
    velocity: tuple[float, float]
    embedding_centroid: np.ndarray
    noise_std: float
    objectness: float
    moving: bool
    stuff: bool = False
    color: tuple[int, int, int] = (200, 80, 80)


@dataclass
class SceneSpec:
    """Full description of a synthetic scene; rendering is a pure function of it."""

    height: int
    width: int
    n_frames: int
    embedding_dim: int
    objects: list[ObjectSpec]
    background_centroid: np.ndarray
    background_noise: float
    background_objectness: float = 0.05
    background_flow: tuple[float, float] = (0.0, 0.0)
    background_color: tuple[int, int, int] = (96, 96, 96)
    objectness_noise: float = 0.02
    flow_noise: float = 0.05
    color_noise: float = 5.0
    drift_per_frame: np.ndarray | None = None  # cumulative k * drift on frame k
    seed: int = 0


@dataclass
class SyntheticSequence:
    """A rendered scene: feature sequence, ground truth, per-object masks."""

    sequence: Sequence
    ground_truth: list[np.ndarray]  # (H, W) bool per frame
    object_masks: list[dict[str, np.ndarray]]  # per frame, name -> bool mask
    spec: SceneSpec


def _object_mask(obj: ObjectSpec, frame: int, height: int, width: int) -> np.ndarray:
    dr, dc = obj.velocity
    r = obj.position[0] + frame * dr
    c = obj.position[1] + frame * dc
    mask = np.zeros((height, width), dtype=bool)
    if obj.shape == "rect":
        h, w = obj.size
        r0, c0 = int(round(r)), int(round(c))
        if r0 < 0 or c0 < 0 or r0 + h > height or c0 + w > width:
            raise ValueError(f"object {obj.name!r} leaves bounds at frame {frame}")
        mask[r0 : r0 + h, c0 : c0 + w] = True
    elif obj.shape == "disk":
        radius = float(obj.size)
        if r - radius < 0 or c - radius < 0 or r + radius > height - 1 or c + radius > width - 1:
            raise ValueError(f"object {obj.name!r} leaves bounds at frame {frame}")
        rr, cc = np.ogrid[:height, :width]
        mask = (rr - r) ** 2 + (cc - c) ** 2 <= radius**2
    else:
        raise ValueError(f"unknown shape {obj.shape!r}")
    return mask


def generate_sequence(spec: SceneSpec) -> SyntheticSequence:
    """Render a scene spec into a feature sequence with ground truth.

    Per frame, a pixel's embedding is its region centroid plus Gaussian noise
    (plus the cumulative global drift when configured); objectness is the
    region level plus noise clamped to [0, 1]; flow is the object displacement
    on moving objects and the background displacement elsewhere; ground truth
    is the union of moving non-stuff objects.
    """
    h, w, e = spec.height, spec.width, spec.embedding_dim
    for obj in spec.objects:
        if not obj.moving and (obj.velocity[0] != 0 or obj.velocity[1] != 0):
            raise ValueError(f"static object {obj.name!r} has nonzero velocity")
        if len(obj.embedding_centroid) != e:
            raise ValueError(f"object {obj.name!r} centroid dim != {e}")

    centroids = np.vstack(
        [np.asarray(spec.background_centroid, dtype=np.float64)]
        + [np.asarray(o.embedding_centroid, dtype=np.float64) for o in spec.objects]
    )
    noise_levels = np.array([spec.background_noise] + [o.noise_std for o in spec.objects])
    objectness_levels = np.array([spec.background_objectness] + [o.objectness for o in spec.objects])
    flows = np.array(
        [spec.background_flow]
        + [
            (o.velocity[1], o.velocity[0]) if o.moving else spec.background_flow
            for o in spec.objects
        ],
        dtype=np.float64,
    )
    colors = np.array([spec.background_color] + [o.color for o in spec.objects], dtype=np.float64)

    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_frames)
    frames: list[FeatureFrame] = []
    ground_truth: list[np.ndarray] = []
    object_masks: list[dict[str, np.ndarray]] = []
    for k in range(spec.n_frames):
        rng = np.random.default_rng(streams[k])
        region = np.zeros((h, w), dtype=np.intp)
        masks: dict[str, np.ndarray] = {}
        for i, obj in enumerate(spec.objects):
            mask = _object_mask(obj, k, h, w)
            region[mask] = i + 1
            masks[obj.name] = mask

        emb = centroids[region] + rng.standard_normal((h, w, e)) * noise_levels[region][:, :, None]
        if spec.drift_per_frame is not None:
            emb = emb + k * np.asarray(spec.drift_per_frame, dtype=np.float64)
        obj_map = objectness_levels[region] + rng.standard_normal((h, w)) * spec.objectness_noise
        obj_map = np.clip(obj_map, 0.0, 1.0)
        flow = flows[region] + rng.standard_normal((h, w, 2)) * spec.flow_noise
        rgb = colors[region] + rng.standard_normal((h, w, 3)) * spec.color_noise
        rgb = np.clip(rgb, 0, 255).astype(np.uint8)

        gt = np.zeros((h, w), dtype=bool)
        for obj in spec.objects:
            if obj.moving and not obj.stuff:
                gt |= masks[obj.name]
        frames.append(
            FeatureFrame(
                embedding=emb.astype(np.float32),
                objectness=obj_map.astype(np.float32),
                flow=flow.astype(np.float32),
                rgb=rgb,
                gt=gt,
            )
        )
        ground_truth.append(gt)
        object_masks.append(masks)
    sequence = Sequence(frames=frames, annotation0=ground_truth[0])
    return SyntheticSequence(
        sequence=sequence, ground_truth=ground_truth, object_masks=object_masks, spec=spec
    )


def write_sequence(synth: SyntheticSequence, out_dir: str | Path) -> Path:
    """Write a rendered scene as manifest + tensor/PNG files; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, frame in enumerate(synth.sequence.frames):
        paths = {
            "embedding": out_dir / f"{k:05d}_embedding.npy",
            "objectness": out_dir / f"{k:05d}_objectness.npy",
            "flow": out_dir / f"{k:05d}_flow.npy",
            "rgb": out_dir / f"{k:05d}_rgb.png",
            "gt": out_dir / f"{k:05d}_gt.png",
        }
        save_tensor(frame.embedding, paths["embedding"])
        save_tensor(frame.objectness, paths["objectness"])
        save_tensor(frame.flow, paths["flow"])
        save_rgb(frame.rgb, paths["rgb"])
        save_mask(synth.ground_truth[k], paths["gt"])
        entries.append(FrameEntry(**paths))
    annotation0 = out_dir / "annotation0.png"
    save_mask(synth.ground_truth[0], annotation0)
    manifest = SequenceManifest(frames=entries, annotation0=annotation0, directory=out_dir)
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    return manifest_path


# -- presets -----------------------------------------------------------------


def _axis_centroid(dim: int, axis: int, magnitude: float = 4.0) -> np.ndarray:
    c = np.zeros(dim)
    c[axis] = magnitude
    return c


def clean_preset(
    seed: int = 7,
    height: int = 96,
    width: int = 160,
    n_frames: int = 20,
    embedding_dim: int = 8,
    noise_std: float = 0.5,
) -> SceneSpec:
    """One moving object plus a static distractor with identical statistics.

    Embedding centroids sit 4 apart (>= 4x the default noise std); the mover
    travels 3 px/frame while the distractor shares its size, noise, and
    objectness but rides the background flow.
    """
    mover = ObjectSpec(
        name="mover",
        shape="rect",
        position=(32, 8),
        size=(26, 30),
        velocity=(0.0, 3.0),
        embedding_centroid=_axis_centroid(embedding_dim, 0),
        noise_std=noise_std,
        objectness=0.9,
        moving=True,
        color=(200, 60, 60),
    )
    distractor = ObjectSpec(
        name="distractor",
        shape="rect",
        position=(62, 112),
        size=(26, 30),
        velocity=(0.0, 0.0),
        embedding_centroid=_axis_centroid(embedding_dim, 1),
        noise_std=noise_std,
        objectness=0.9,
        moving=False,
        color=(60, 60, 200),
    )
    return SceneSpec(
        height=height,
        width=width,
        n_frames=n_frames,
        embedding_dim=embedding_dim,
        objects=[mover, distractor],
        background_centroid=np.zeros(embedding_dim),
        background_noise=noise_std,
        seed=seed,
    )


def drift_preset(
    seed: int = 11,
    height: int = 96,
    width: int = 160,
    n_frames: int = 20,
    embedding_dim: int = 8,
    drift_magnitude: float = 0.45,
    noise_std: float = 0.4,
) -> SceneSpec:
    """Clean-scene geometry plus a global linear embedding drift.

    The drift points from the mover's centroid toward the background's, so
    frame-0 foreground references gradually misclassify later frames; by
    mid-sequence the mover's embeddings sit closer to frame-0 background than
    to frame-0 foreground.
    """
    spec = clean_preset(
        seed=seed,
        height=height,
        width=width,
        n_frames=n_frames,
        embedding_dim=embedding_dim,
        noise_std=noise_std,
    )
    drift = np.zeros(embedding_dim)
    drift[0] = -drift_magnitude
    return replace(spec, drift_per_frame=drift)


def ranking_preset(
    seed: int = 13,
    height: int = 96,
    width: int = 160,
    n_frames: int = 20,
    embedding_dim: int = 8,
) -> SceneSpec:
    """Moving low-objectness "stuff", a static object, and the true target.

    Motion-only ranking locks onto the stuff band (largest flow contrast);
    objectness-only onto the static object (highest score); only the combined
    product ranks the moving target first.
    """
    stuff = ObjectSpec(
        name="stuff",
        shape="rect",
        position=(4, 10),
        size=(20, 60),
        velocity=(0.0, 4.0),
        embedding_centroid=_axis_centroid(embedding_dim, 2),
        noise_std=0.5,
        objectness=0.15,
        moving=True,
        stuff=True,
        color=(90, 140, 190),
    )
    target = ObjectSpec(
        name="target",
        shape="rect",
        position=(36, 8),
        size=(24, 30),
        velocity=(0.0, 3.0),
        embedding_centroid=_axis_centroid(embedding_dim, 0),
        noise_std=0.5,
        objectness=0.85,
        moving=True,
        color=(200, 60, 60),
    )
    static = ObjectSpec(
        name="static",
        shape="rect",
        position=(66, 112),
        size=(24, 30),
        velocity=(0.0, 0.0),
        embedding_centroid=_axis_centroid(embedding_dim, 1),
        noise_std=0.5,
        objectness=0.9,
        moving=False,
        color=(60, 60, 200),
    )
    return SceneSpec(
        height=height,
        width=width,
        n_frames=n_frames,
        embedding_dim=embedding_dim,
        objects=[stuff, target, static],
        background_centroid=np.zeros(embedding_dim),
        background_noise=0.5,
        objectness_noise=0.01,
        seed=seed,
    )


PRESETS = {"clean": clean_preset, "drift": drift_preset, "ranking": ranking_preset}


# -- brute-force oracles ------------------------------------------------------


def oracle_minimax(graph: PixelGraph, source: tuple[int, int], target: tuple[int, int] | None = None):
    """Minimax distances by exhaustive simple-path enumeration (tiny grids only).

    Returns the (H, W) distance map, or the single distance when ``target``
    is given. Feasible up to roughly 4x4.
    """
    n = graph.n_pixels
    if n > 16:
        raise ValueError(f"grid too large for path enumeration ({n} pixels)")
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    u, v, w = graph.edge_arrays()
    for a, b, wt in zip(u.tolist(), v.tolist(), w.tolist()):
        adj[a].append((b, wt))
        adj[b].append((a, wt))
    src = int(source[0]) * graph.width + int(source[1])
    best = [np.inf] * n
    best[src] = 0.0
    visited = [False] * n
    visited[src] = True

    def walk(node: int, running_max: float) -> None:
        for nxt, wt in adj[node]:
            if visited[nxt]:
                continue
            m = running_max if running_max > wt else wt
            if m < best[nxt]:
                best[nxt] = m
            visited[nxt] = True
            walk(nxt, m)
            visited[nxt] = False

    walk(src, 0.0)
    result = np.asarray(best, dtype=np.float32).reshape(graph.height, graph.width)
    if target is not None:
        return float(result[int(target[0]), int(target[1])])
    return result


def oracle_geodesic(graph: PixelGraph, seed_pixels: np.ndarray) -> np.ndarray:
    """Voronoi labels from independent per-seed Dijkstra runs (small grids).

    Pure-Python reference for :func:`embedseg.graph.assign_regions`: one
    single-source sum-distance run per seed, argmin with lowest-index ties.
    """
    n = graph.n_pixels
    if n > 64:
        raise ValueError(f"grid too large for the naive oracle ({n} pixels)")
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    u, v, w = graph.edge_arrays()
    for a, b, wt in zip(u.tolist(), v.tolist(), w.tolist()):
        adj[a].append((b, float(wt)))
        adj[b].append((a, float(wt)))
    seed_pixels = np.atleast_2d(np.asarray(seed_pixels))
    all_dist = []
    for r, c in seed_pixels:
        src = int(r) * graph.width + int(c)
        dist = [np.inf] * n
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist[node]:
                continue
            for nxt, wt in adj[node]:
                nd = d + wt
                if nd < dist[nxt]:
                    dist[nxt] = nd
                    heapq.heappush(heap, (nd, nxt))
        all_dist.append(dist)
    labels = np.zeros(n, dtype=np.int32)
    for p in range(n):
        best_d = all_dist[0][p]
        best_s = 0
        for s in range(1, len(all_dist)):
            if all_dist[s][p] < best_d:
                best_d = all_dist[s][p]
                best_s = s
        labels[p] = best_s
    return labels.reshape(graph.height, graph.width)
