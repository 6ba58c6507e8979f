"""Link seeds across frames into tracks and rank them for foreground selection.

Each frame-0 seed starts a track; at every step the next frame's seed with the
largest total similarity to *all* current members joins. Tracks are scored by
the mean per-member product of objectness and motion saliency (or either cue
alone, for the ranking ablation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import SeedSet, similarity_matrix

__all__ = [
    "SeedTrack",
    "RANKING_MODES",
    "extend_track",
    "build_tracks",
    "score_track",
    "select_foreground_track",
]

RANKING_MODES = ("combined", "motion", "objectness")


@dataclass
class SeedTrack:
    """One seed per tracked frame, with cached member embeddings."""

    frames: list[int]  # frame indices, ascending
    seed_indices: list[int]  # index into each frame's SeedSet
    embeddings: list[np.ndarray] = field(default_factory=list)  # (E,) per member

    def __len__(self) -> int:
        return len(self.seed_indices)

    def member_on_frame(self, frame: int) -> int:
        """Seed index of this track's member on ``frame``."""
        return self.seed_indices[self.frames.index(frame)]


def extend_track(track: SeedTrack, next_seeds: SeedSet) -> int:
    """Index of the next-frame seed with the largest summed similarity to the track.

    The sum runs over every current member; ties break to the lowest index.
    """
    if len(next_seeds) == 0:
        raise ValueError("next-frame seed set is empty")
    members = np.asarray(track.embeddings, dtype=np.float64)
    totals = similarity_matrix(next_seeds.embeddings, members).sum(axis=1)
    return int(np.argmax(totals))


def build_tracks(per_frame_seeds: list[SeedSet], stride: int = 1) -> list[SeedTrack]:
    """Grow one track per frame-0 seed through the sequence.

    ``stride`` > 1 tracks only frames 0, stride, 2*stride, ...; the default
    covers every frame. Tracks may share later seeds (no exclusivity).
    """
    if not per_frame_seeds:
        raise ValueError("no frames")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    first = per_frame_seeds[0]
    if len(first) == 0:
        raise ValueError("frame 0 has no seeds")
    tracks = [
        SeedTrack(frames=[0], seed_indices=[j], embeddings=[first.embeddings[j]])
        for j in range(len(first))
    ]
    tracked_frames = range(stride, len(per_frame_seeds), stride)
    for frame in tracked_frames:
        seeds = per_frame_seeds[frame]
        # One similarity matrix serves every track on this frame.
        sims = [
            similarity_matrix(seeds.embeddings, per_frame_seeds[f].embeddings)
            for f in tracks[0].frames
        ]
        for track in tracks:
            totals = np.zeros(len(seeds))
            for sim, j in zip(sims, track.seed_indices):
                totals += sim[:, j]
            r = int(np.argmax(totals))
            track.frames.append(frame)
            track.seed_indices.append(r)
            track.embeddings.append(seeds.embeddings[r])
    return tracks


def score_track(
    track: SeedTrack,
    objectness: list[np.ndarray],
    saliency: list[np.ndarray],
    mode: str = "combined",
) -> float:
    """Foreground score: mean over members of O*M (``combined``), M, or O.

    ``objectness`` and ``saliency`` hold one per-seed array per frame.
    """
    if mode not in RANKING_MODES:
        raise ValueError(f"unknown ranking mode {mode!r}, expected one of {RANKING_MODES}")
    o = np.array([objectness[f][j] for f, j in zip(track.frames, track.seed_indices)])
    m = np.array([saliency[f][j] for f, j in zip(track.frames, track.seed_indices)])
    if mode == "motion":
        return float(m.mean())
    if mode == "objectness":
        return float(o.mean())
    return float((o * m).mean())


def select_foreground_track(scores: np.ndarray) -> int:
    """Index of the highest-scoring track; ties break to the lowest index."""
    scores = np.asarray(scores)
    if len(scores) == 0:
        raise ValueError("no tracks to select from")
    return int(np.argmax(scores))
