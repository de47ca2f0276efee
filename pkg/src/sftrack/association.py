"""Cost construction and optimal assignment for both association stages.

Costs live in [0, 1] (1 - fused similarity). FORBIDDEN marks pairs the
solver must never select: IoU below the stage gate or mismatched classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import appearance
from .config import TrackerConfig
from .types import Detection, iou_matrix

FORBIDDEN = np.inf

# Finite stand-in for forbidden entries while solving; any matching that can
# avoid it will, and post-filtering drops it if not.
_BIG = 1e6


@dataclass
class Assignment:
    matches: list[tuple[int, int]]
    unmatched_rows: list[int]
    unmatched_cols: list[int]


def fuse_first(iou_value: float, embed_sim: float | None) -> float:
    """First-stage similarity: IoU times embedding cosine; IoU alone when
    either side has no embedding."""
    if embed_sim is None:
        return iou_value
    return iou_value * embed_sim


def fuse_second(iou_value: float, hist_sim: float, mse_sim: float) -> float:
    """Second-stage similarity: product of IoU, histogram and MSE cues."""
    return iou_value * hist_sim * mse_sim


def hungarian(cost: np.ndarray, min_similarity: float = 0.0) -> Assignment:
    """Minimum-cost assignment over the smaller side of a rectangular matrix.

    FORBIDDEN entries are never selected. Matches whose similarity
    (1 - cost) falls below ``min_similarity`` are demoted to unmatched.
    """
    cost = np.asarray(cost, dtype=float)
    n_rows, n_cols = cost.shape if cost.ndim == 2 else (0, 0)
    if n_rows == 0 or n_cols == 0:
        return Assignment([], list(range(n_rows)), list(range(n_cols)))
    solvable = np.where(np.isfinite(cost), cost, _BIG)
    row_idx, col_idx = linear_sum_assignment(solvable)
    matches = []
    for r, c in zip(row_idx, col_idx):
        if not np.isfinite(cost[r, c]):
            continue
        if min_similarity > 0.0 and 1.0 - cost[r, c] < min_similarity:
            continue
        matches.append((int(r), int(c)))
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    return Assignment(
        matches,
        [r for r in range(n_rows) if r not in matched_rows],
        [c for c in range(n_cols) if c not in matched_cols],
    )


def build_stage_matrix(tracks: Sequence, detections: Sequence[Detection],
                       stage: Literal["first", "second"],
                       frame: np.ndarray | None,
                       config: TrackerConfig,
                       use_appearance: bool = True) -> np.ndarray:
    """Cost matrix for one cascade stage.

    ``tracks`` need ``class_id``, ``predicted_box`` and ``appearance``
    attributes. Entries are FORBIDDEN when IoU is below the stage gate or
    the classes differ. ``use_appearance=False`` reduces the second stage
    to plain IoU (the confidence-cascade baseline behaviour).
    """
    n_t, n_d = len(tracks), len(detections)
    cost = np.full((n_t, n_d), FORBIDDEN)
    if n_t == 0 or n_d == 0:
        return cost
    gate = config.iou_gate_first if stage == "first" else config.iou_gate_second
    ious = iou_matrix([t.predicted_box for t in tracks], [d.box for d in detections])

    det_crops: list[np.ndarray | None] = [None] * n_d
    det_hists: list[appearance.ColorHistogram | None] = [None] * n_d
    det_patches: list[np.ndarray | None] = [None] * n_d
    if stage == "second" and use_appearance and frame is not None:
        for j, det in enumerate(detections):
            crop = appearance.extract_crop(frame, det.box)
            det_crops[j] = crop
            if crop is not None:
                det_hists[j] = appearance.color_histogram(crop, config.hist_bins_per_channel)
                det_patches[j] = appearance.resize_bilinear(crop, config.mse_patch_size)

    for i, track in enumerate(tracks):
        for j, det in enumerate(detections):
            if track.class_id != det.class_id:
                continue
            iou_value = float(ious[i, j])
            if iou_value < gate:
                continue
            if stage == "first":
                embed_sim = None
                if use_appearance and det.embedding is not None \
                        and track.appearance.embedding is not None:
                    embed_sim = appearance.embedding_similarity(
                        track.appearance.embedding, det.embedding)
                sim = fuse_first(iou_value, embed_sim)
            else:
                if use_appearance:
                    mem = track.appearance
                    if det_crops[j] is None or mem.histogram is None:
                        h_sim = m_sim = 0.0
                    else:
                        h_sim = appearance.hist_similarity(mem.histogram, det_hists[j])
                        m_sim = appearance.patch_mse_similarity(mem.patch, det_patches[j])
                    sim = fuse_second(iou_value, h_sim, m_sim)
                else:
                    sim = iou_value
            cost[i, j] = 1.0 - sim
    return cost
