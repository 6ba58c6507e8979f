"""Load, validate, and persist dense feature maps, masks, and sequence manifests.

Interchange formats:

* Tensors: NPY v1.0, little-endian float32, C-order. Embeddings are (H, W, E),
  objectness (H, W), flow (H, W, 2) with channel 0 = horizontal displacement in
  pixels/frame and channel 1 = vertical.
* Masks: 8-bit single-channel PNG containing only 0 (background) and 255
  (foreground).
* RGB frames: 8-bit 3-channel PNG.
* Manifest: one JSON document per sequence with a ``frames`` list (objects with
  ``embedding``/``objectness``/``flow``/``rgb`` and optional ``gt`` paths) and
  an optional ``annotation0`` first-frame mask path. Relative paths resolve
  against the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib import format as npy_format
from PIL import Image

__all__ = [
    "FormatError",
    "FrameEntry",
    "SequenceManifest",
    "FeatureFrame",
    "Sequence",
    "load_tensor",
    "save_tensor",
    "load_mask",
    "save_mask",
    "load_rgb",
    "save_rgb",
    "load_manifest",
    "save_manifest",
    "load_sequence",
]

# Tolerance when validating objectness range before clamping to [0, 1].
_OBJECTNESS_SLACK = 1e-6


class FormatError(ValueError):
    """A file does not conform to the interchange format."""


# -- tensors ---------------------------------------------------------------


def load_tensor(path: str | Path) -> np.ndarray:
    """Read an NPY v1.0 float32 tensor, validating header and payload.

    Returns the array bit-exact as stored. Raises :class:`FormatError` with a
    distinct message for a malformed header, a non-float32 payload, or a
    payload whose length disagrees with the declared shape.
    """
    path = Path(path)
    with open(path, "rb") as fp:
        try:
            version = npy_format.read_magic(fp)
        except Exception as exc:
            raise FormatError(f"{path}: malformed NPY header ({exc})") from exc
        if version != (1, 0):
            raise FormatError(f"{path}: NPY version {version} not supported, expected 1.0")
        try:
            shape, fortran_order, dtype = npy_format.read_array_header_1_0(fp)
        except Exception as exc:
            raise FormatError(f"{path}: malformed NPY header ({exc})") from exc
        if dtype != np.dtype("<f4"):
            raise FormatError(
                f"{path}: payload dtype is {dtype.str}, expected little-endian float32 (<f4)"
            )
        if fortran_order:
            raise FormatError(f"{path}: Fortran-order payload, expected C-order")
        payload = fp.read()
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    if len(payload) != count * 4:
        raise FormatError(
            f"{path}: shape {shape} declares {count} floats but payload holds "
            f"{len(payload) // 4} ({len(payload)} bytes)"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return data


def save_tensor(array: np.ndarray, path: str | Path) -> None:
    """Write ``array`` as canonical NPY v1.0 little-endian float32, C-order."""
    out = np.ascontiguousarray(array, dtype="<f4")
    with open(path, "wb") as fp:
        npy_format.write_array(fp, out, version=(1, 0))


# -- masks and frames ------------------------------------------------------


def load_mask(path: str | Path) -> np.ndarray:
    """Read a binary mask PNG. Foreground is 255, background 0."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise FormatError(f"{path}: mask PNG mode is {img.mode!r}, expected 8-bit 'L'")
            raw = np.asarray(img, dtype=np.uint8)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"{path}: unreadable mask file ({exc})") from exc
    bad = (raw != 0) & (raw != 255)
    if bad.any():
        values = np.unique(raw[bad])[:5]
        raise FormatError(f"{path}: non-binary mask values {values.tolist()} (expected 0/255)")
    return raw == 255


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a boolean mask as an 8-bit PNG with foreground 255."""
    raw = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(raw, mode="L").save(path, format="PNG")


def load_rgb(path: str | Path) -> np.ndarray:
    """Read an 8-bit 3-channel PNG frame as (H, W, 3) uint8."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise FormatError(f"{path}: frame PNG mode is {img.mode!r}, expected 'RGB'")
            return np.asarray(img, dtype=np.uint8)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"{path}: unreadable RGB file ({exc})") from exc


def save_rgb(image: np.ndarray, path: str | Path) -> None:
    image = np.asarray(image, dtype=np.uint8)
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


# -- manifests and sequences -----------------------------------------------


@dataclass
class FrameEntry:
    """Paths (absolute, already resolved) for one frame's feature files."""

    embedding: Path
    objectness: Path
    flow: Path
    rgb: Path
    gt: Path | None = None


@dataclass
class SequenceManifest:
    frames: list[FrameEntry]
    annotation0: Path | None = None
    directory: Path = field(default_factory=Path)


def load_manifest(path: str | Path) -> SequenceManifest:
    """Parse a sequence manifest; relative paths resolve against its directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable manifest ({exc})") from exc
    if not isinstance(doc, dict) or "frames" not in doc or not doc["frames"]:
        raise FormatError(f"{path}: manifest must contain a non-empty 'frames' list")
    base = path.parent

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    frames = []
    for i, entry in enumerate(doc["frames"]):
        missing = [k for k in ("embedding", "objectness", "flow", "rgb") if k not in entry]
        if missing:
            raise FormatError(f"{path}: frame {i} missing keys {missing}")
        frames.append(
            FrameEntry(
                embedding=resolve(entry["embedding"]),
                objectness=resolve(entry["objectness"]),
                flow=resolve(entry["flow"]),
                rgb=resolve(entry["rgb"]),
                gt=resolve(entry["gt"]) if entry.get("gt") else None,
            )
        )
    annotation0 = resolve(doc["annotation0"]) if doc.get("annotation0") else None
    return SequenceManifest(frames=frames, annotation0=annotation0, directory=base)


def save_manifest(manifest: SequenceManifest, path: str | Path) -> None:
    """Write a manifest JSON with paths relative to its directory when possible."""
    path = Path(path)
    base = path.parent

    def rel(p: Path | None) -> str | None:
        if p is None:
            return None
        try:
            return str(Path(p).relative_to(base))
        except ValueError:
            return str(p)

    doc: dict = {
        "frames": [
            {
                k: v
                for k, v in {
                    "embedding": rel(f.embedding),
                    "objectness": rel(f.objectness),
                    "flow": rel(f.flow),
                    "rgb": rel(f.rgb),
                    "gt": rel(f.gt),
                }.items()
                if v is not None
            }
            for f in manifest.frames
        ]
    }
    if manifest.annotation0 is not None:
        doc["annotation0"] = rel(manifest.annotation0)
    path.write_text(json.dumps(doc, indent=2) + "\n")


@dataclass
class FeatureFrame:
    """One frame's dense features: embedding (H,W,E), objectness (H,W),
    flow (H,W,2), rgb (H,W,3), optional ground-truth mask (H,W) bool."""

    embedding: np.ndarray
    objectness: np.ndarray
    flow: np.ndarray
    rgb: np.ndarray
    gt: np.ndarray | None = None

    @property
    def height(self) -> int:
        return self.embedding.shape[0]

    @property
    def width(self) -> int:
        return self.embedding.shape[1]

    @property
    def embedding_dim(self) -> int:
        return self.embedding.shape[2]


@dataclass
class Sequence:
    """An immutable, validated sequence of feature frames."""

    frames: list[FeatureFrame]
    annotation0: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def embedding_dim(self) -> int:
        return self.frames[0].embedding_dim


def _load_frame(entry: FrameEntry, index: int) -> FeatureFrame:
    emb = load_tensor(entry.embedding)
    if emb.ndim != 3:
        raise FormatError(f"frame {index}: embedding must be (H, W, E), got shape {emb.shape}")
    obj = load_tensor(entry.objectness)
    if obj.ndim == 3 and obj.shape[2] == 1:
        obj = obj[:, :, 0]
    if obj.ndim != 2:
        raise FormatError(f"frame {index}: objectness must be (H, W), got shape {obj.shape}")
    if obj.min() < -_OBJECTNESS_SLACK or obj.max() > 1.0 + _OBJECTNESS_SLACK:
        raise FormatError(
            f"frame {index}: objectness values outside [0, 1] "
            f"(min {obj.min():.6g}, max {obj.max():.6g})"
        )
    obj = np.clip(obj, 0.0, 1.0)
    flow = load_tensor(entry.flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise FormatError(f"frame {index}: flow must be (H, W, 2), got shape {flow.shape}")
    rgb = load_rgb(entry.rgb)
    gt = load_mask(entry.gt) if entry.gt is not None else None

    h, w = emb.shape[:2]
    for name, arr in (("objectness", obj), ("flow", flow), ("rgb", rgb)):
        if arr.shape[:2] != (h, w):
            raise FormatError(
                f"frame {index}: {name} shape {arr.shape[:2]} does not match embedding ({h}, {w})"
            )
    if gt is not None and gt.shape != (h, w):
        raise FormatError(f"frame {index}: gt mask shape {gt.shape} does not match ({h}, {w})")
    return FeatureFrame(embedding=emb, objectness=obj, flow=flow, rgb=rgb, gt=gt)


def load_sequence(manifest: SequenceManifest | str | Path) -> Sequence:
    """Load and cross-validate every frame named by a manifest."""
    if not isinstance(manifest, SequenceManifest):
        manifest = load_manifest(manifest)
    frames = [_load_frame(entry, i) for i, entry in enumerate(manifest.frames)]
    h, w, e = frames[0].height, frames[0].width, frames[0].embedding_dim
    for i, f in enumerate(frames[1:], start=1):
        if (f.height, f.width) != (h, w):
            raise FormatError(
                f"frame {i}: resolution {(f.height, f.width)} differs from frame 0 ({h}, {w})"
            )
        if f.embedding_dim != e:
            raise FormatError(
                f"frame {i}: embedding dim {f.embedding_dim} differs from frame 0 ({e})"
            )
    annotation0 = None
    if manifest.annotation0 is not None:
        annotation0 = load_mask(manifest.annotation0)
        if annotation0.shape != (h, w):
            raise FormatError(
                f"annotation0 shape {annotation0.shape} does not match sequence ({h}, {w})"
            )
    return Sequence(frames=frames, annotation0=annotation0)
