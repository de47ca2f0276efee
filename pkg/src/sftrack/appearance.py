"""Hand-crafted appearance cues and the pluggable embedding provider.

Color histograms use B equal-width intensity levels per RGB channel
(B = 8 by default: 0-31, 32-63, ..., 224-255). Histogram similarity is
one minus the mean per-channel Hellinger distance. Crop dissimilarity is
the MSE between both crops resized to a common patch, normalized by 255^2
and subtracted from one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .types import BoundingBox

log = logging.getLogger(__name__)

# Spatial layout of the fallback embedding: rows x cols grid of per-cell
# 3-channel histograms, L2-normalized. 2*4 cells * 24 bins = 192 dims.
FALLBACK_GRID = (2, 4)


@dataclass(frozen=True, eq=False)
class ColorHistogram:
    """Per-channel normalized frequencies, shape (3, bins)."""

    bins: np.ndarray
    is_degenerate: bool = False


def color_histogram(crop: np.ndarray | None, bins_per_channel: int = 8) -> ColorHistogram:
    if crop is None or crop.size == 0:
        return ColorHistogram(np.zeros((3, bins_per_channel)), is_degenerate=True)
    width = 256 // bins_per_channel
    idx = crop.reshape(-1, 3).astype(np.int64) // width
    out = np.empty((3, bins_per_channel))
    n = idx.shape[0]
    for c in range(3):
        out[c] = np.bincount(idx[:, c], minlength=bins_per_channel) / n
    return ColorHistogram(out)


def hist_similarity(h1: ColorHistogram, h2: ColorHistogram) -> float:
    """1 - mean Hellinger distance over channels, in [0, 1]."""
    if h1.is_degenerate or h2.is_degenerate:
        return 0.0
    bc = np.sqrt(h1.bins * h2.bins).sum(axis=1)
    dist = np.sqrt(np.clip(1.0 - bc, 0.0, 1.0))
    return float(1.0 - dist.mean())


def resize_bilinear(crop: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Resize (h, w, 3) uint8 to (size[1], size[0], 3) float64.

    Sample positions use the half-pixel-center convention so that resizing
    to the same size is the identity.
    """
    tw, th = size
    sh, sw = crop.shape[:2]
    src = crop.astype(np.float64)
    xs = (np.arange(tw) + 0.5) * (sw / tw) - 0.5
    ys = (np.arange(th) + 0.5) * (sh / th) - 0.5
    x0 = np.clip(np.floor(xs).astype(int), 0, sw - 1)
    y0 = np.clip(np.floor(ys).astype(int), 0, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)
    fx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    fy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def scaled_mse_similarity(crop_a: np.ndarray | None, crop_b: np.ndarray | None,
                          patch: tuple[int, int] = (32, 32)) -> float:
    if crop_a is None or crop_b is None or crop_a.size == 0 or crop_b.size == 0:
        return 0.0
    pa = resize_bilinear(crop_a, patch)
    pb = resize_bilinear(crop_b, patch)
    mse = float(np.mean((pa - pb) ** 2))
    return 1.0 - mse / (255.0 ** 2)


def patch_mse_similarity(patch_a: np.ndarray | None, patch_b: np.ndarray | None) -> float:
    """MSE similarity between two already-resized patches."""
    if patch_a is None or patch_b is None:
        return 0.0
    mse = float(np.mean((patch_a - patch_b) ** 2))
    return 1.0 - mse / (255.0 ** 2)


def embedding_similarity(e1: np.ndarray, e2: np.ndarray) -> float:
    """Cosine similarity clamped to [0, 1]; renormalizes non-unit inputs."""
    n1 = float(np.linalg.norm(e1))
    n2 = float(np.linalg.norm(e2))
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    if abs(n1 - 1.0) > 1e-6 or abs(n2 - 1.0) > 1e-6:
        log.warning("non-unit embedding renormalized (norms %.6f, %.6f)", n1, n2)
    return max(0.0, float(np.dot(e1, e2) / (n1 * n2)))


def extract_crop(frame: np.ndarray, box: BoundingBox) -> np.ndarray | None:
    """Pixels under the box, rounded to the pixel grid and clamped to bounds.

    Returns None for boxes that are empty after clamping (the degenerate-crop
    marker; downstream similarities treat it as 0).
    """
    h, w = frame.shape[:2]
    x0 = max(0, int(round(box.left)))
    y0 = max(0, int(round(box.top)))
    x1 = min(w, int(round(box.left + box.width)))
    y1 = min(h, int(round(box.top + box.height)))
    if x1 <= x0 or y1 <= y0:
        return None
    return frame[y0:y1, x0:x1]


def fallback_embedding(crop: np.ndarray | None, bins_per_channel: int = 8) -> np.ndarray | None:
    """Hand-crafted stand-in for a learned descriptor.

    The crop is split into a FALLBACK_GRID spatial grid; each cell contributes
    a per-channel histogram. The concatenation is L2-normalized.
    """
    if crop is None or crop.size == 0:
        return None
    rows, cols = FALLBACK_GRID
    parts = []
    for r_block in np.array_split(crop, rows, axis=0):
        for cell in np.array_split(r_block, cols, axis=1):
            parts.append(color_histogram(cell if cell.size else None, bins_per_channel).bins.ravel())
    vec = np.concatenate(parts)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        return None
    return vec / norm


def load_embeddings(path: str | Path) -> dict[tuple[int, int], np.ndarray]:
    """Load ``frame,det_index,v1,...,vD`` embedding files.

    Frames are 1-based, det_index is 0-based in detection-file order within
    the frame. Vectors are renormalized to unit norm; dimensions must agree
    across the file.
    """
    out: dict[tuple[int, int], np.ndarray] = {}
    dim: int | None = None
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.strip().split(",")
        if len(parts) < 3:
            raise ParseError("expected frame,det_index,v1,...", str(path), lineno)
        try:
            frame = int(parts[0])
            det_index = int(parts[1])
            vec = np.array([float(p) for p in parts[2:]])
        except ValueError:
            raise ParseError(f"malformed embedding row {line!r}", str(path), lineno)
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ParseError(f"dimension {vec.size} differs from {dim}", str(path), lineno)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ParseError("zero embedding vector cannot be normalized", str(path), lineno)
        out[(frame, det_index)] = vec / norm
    return out


@dataclass
class AppearanceMemory:
    """Per-track cache of the last matched crop's descriptors."""

    histogram: ColorHistogram | None = None
    patch: np.ndarray | None = field(default=None, repr=False)
    embedding: np.ndarray | None = field(default=None, repr=False)

    def update_crop(self, crop: np.ndarray | None, bins_per_channel: int,
                    patch_size: tuple[int, int]) -> None:
        # Degenerate crops leave the previous descriptors in place.
        if crop is None or crop.size == 0:
            return
        self.histogram = color_histogram(crop, bins_per_channel)
        self.patch = resize_bilinear(crop, patch_size)

    def update_embedding(self, embedding: np.ndarray | None, momentum: float) -> None:
        if embedding is None:
            return
        if self.embedding is None:
            self.embedding = embedding.copy()
            return
        mixed = momentum * self.embedding + (1.0 - momentum) * embedding
        norm = np.linalg.norm(mixed)
        self.embedding = mixed / norm if norm > 0 else embedding.copy()
