"""Per-frame tracking: confidence split, camera motion compensation,
two-stage association, lifecycle management, and both initiation paths.

One frame step runs, in order:

1. split detections at the confidence threshold (strictly greater goes high);
2. Kalman-predict every live track, then apply the scale-constrained camera
   transform when motion compensation is on;
3. first association of all live tracks against high detections
   (IoU x embedding cosine, Hungarian);
4. second association of the remainder against low detections (IoU x color
   histogram x scaled MSE, or plain IoU when traditional matching is off);
5. unmatched tracks turn Lost and are removed after the grace period;
6. every unmatched high detection starts a new track;
7. with low initiation on, an unmatched low detection starts a track when
   its appearance similarity against same-class high detections of this
   frame clears the initiation threshold (the gate is vacuous when the frame
   has no same-class high detection);
8. matched Lost tracks return to Active with their miss count reset.

Reported outputs carry the matched detection's box and score, so a perfect
detector reproduces ground truth exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import appearance, association, kalman, motion
from .config import TrackerConfig
from .types import BoundingBox, Detection, from_cxcyah, to_cxcyah


class TrackStatus(enum.Enum):
    ACTIVE = "active"
    LOST = "lost"
    REMOVED = "removed"


class Track:
    """An identity-preserving trajectory owned by a single tracker."""

    def __init__(self, track_id: int, detection: Detection, frame: int):
        self.track_id = track_id
        self.class_id = detection.class_id
        self.status = TrackStatus.ACTIVE
        self.kalman_state = kalman.initiate(to_cxcyah(detection.box))
        self.last_frame = frame
        self.miss_count = 0
        self.appearance = appearance.AppearanceMemory()
        self.history: list[tuple[int, BoundingBox]] = [(frame, detection.box)]

    @property
    def predicted_box(self) -> BoundingBox:
        cx, cy, a, h = kalman.state_box_cxcyah(self.kalman_state)
        if h <= 0 or a <= 0:
            return BoundingBox(cx, cy, 0.0, 0.0)
        return from_cxcyah(cx, cy, a, h)

    def mark_matched(self, detection: Detection, frame: int) -> None:
        self.kalman_state = kalman.update(self.kalman_state, to_cxcyah(detection.box))
        self.status = TrackStatus.ACTIVE
        self.miss_count = 0
        self.last_frame = frame
        self.history.append((frame, detection.box))

    def mark_missed(self, grace_frames: int) -> bool:
        """Returns True when the track was removed."""
        self.miss_count += 1
        if self.miss_count >= grace_frames:
            self.status = TrackStatus.REMOVED
            return True
        self.status = TrackStatus.LOST
        return False


@dataclass
class FrameDiagnostics:
    n_high: int = 0
    n_low: int = 0
    n_matched_first: int = 0
    n_matched_second: int = 0
    n_new_high: int = 0
    n_new_low: int = 0
    n_removed: int = 0
    motion: motion.MotionEstimate | None = None
    used_embeddings: bool = False
    # (before, after) aspect ratios captured around motion compensation.
    aspect_pairs: list[tuple[float, float]] = field(default_factory=list)
    predicted_boxes: dict[int, BoundingBox] = field(default_factory=dict)


@dataclass
class FrameResult:
    frame: int
    outputs: list[tuple[int, int, BoundingBox, float]]
    diagnostics: FrameDiagnostics


class Tracker:
    """Stateful per-sequence tracker; step() must be called in frame order.

    ``embeddings`` maps (frame, det_index) to precomputed unit vectors; when
    absent and ``handcrafted_fallback`` is on, a color-layout descriptor is
    computed from the frame pixels instead. With no embeddings at all the
    first association degrades to plain IoU.
    """

    def __init__(self, config: TrackerConfig | None = None,
                 embeddings: dict[tuple[int, int], np.ndarray] | None = None,
                 handcrafted_fallback: bool = True):
        self.config = config or TrackerConfig()
        self.embeddings = embeddings
        self.handcrafted_fallback = handcrafted_fallback
        self.tracks: list[Track] = []
        self._next_id = 1
        self._last_frame_index: int | None = None
        self._prev_image: np.ndarray | None = None

    # -- helpers ------------------------------------------------------------

    def _live_tracks(self) -> list[Track]:
        return [t for t in self.tracks if t.status != TrackStatus.REMOVED]

    def _embedding_for(self, frame_index: int, det_index: int,
                       det: Detection, image: np.ndarray) -> np.ndarray | None:
        if det.embedding is not None:
            return det.embedding
        if self.embeddings is not None:
            vec = self.embeddings.get((frame_index, det_index))
            if vec is not None:
                return vec
        if self.handcrafted_fallback:
            crop = appearance.extract_crop(image, det.box)
            return appearance.fallback_embedding(crop, self.config.hist_bins_per_channel)
        return None

    def _start_track(self, det: Detection, frame_index: int, image: np.ndarray) -> Track:
        track = Track(self._next_id, det, frame_index)
        self._next_id += 1
        crop = appearance.extract_crop(image, det.box)
        track.appearance.update_crop(crop, self.config.hist_bins_per_channel,
                                     self.config.mse_patch_size)
        track.appearance.update_embedding(det.embedding, self.config.embedding_ema_momentum)
        self.tracks.append(track)
        return track

    def _match_track(self, track: Track, det: Detection, frame_index: int,
                     image: np.ndarray) -> None:
        track.mark_matched(det, frame_index)
        crop = appearance.extract_crop(image, det.box)
        track.appearance.update_crop(crop, self.config.hist_bins_per_channel,
                                     self.config.mse_patch_size)
        track.appearance.update_embedding(det.embedding, self.config.embedding_ema_momentum)

    # -- main step ----------------------------------------------------------

    def step(self, frame_index: int, image: np.ndarray,
             detections: list[Detection]) -> FrameResult:
        if self._last_frame_index is not None and frame_index <= self._last_frame_index:
            raise ValueError(
                f"frame index {frame_index} is not increasing (last {self._last_frame_index})")
        for det in detections:
            if det.frame != frame_index:
                raise ValueError(f"detection for frame {det.frame} fed to frame {frame_index}")
        diag = FrameDiagnostics()
        cfg = self.config

        use_embeddings = self.embeddings is not None or self.handcrafted_fallback
        dets = []
        for j, det in enumerate(detections):
            if use_embeddings:
                det = det.with_embedding(self._embedding_for(frame_index, j, det, image))
            dets.append(det)

        d_high = [d for d in dets if d.score > cfg.tau]
        d_low = [d for d in dets if d.score <= cfg.tau]
        diag.n_high, diag.n_low = len(d_high), len(d_low)

        # Predict, then compensate camera motion.
        live = self._live_tracks()
        for track in live:
            track.kalman_state = kalman.predict(track.kalman_state)
        if cfg.mc_enabled and self._prev_image is not None and live:
            estimate = motion.estimate_camera_motion(
                self._prev_image, image, downscale_factor=cfg.mc_downscale,
                seed=frame_index)
            diag.motion = estimate
            # A collapsed fit cannot be applied to track states; treat the
            # frame as having no usable camera estimate.
            degenerate = abs(float(np.linalg.det(estimate.transform.linear))) < 1e-6
            if not degenerate and not estimate.transform.is_identity():
                for track in live:
                    before = float(track.kalman_state.mean[2])
                    track.kalman_state = motion.apply_to_track(
                        estimate.transform, track.kalman_state)
                    diag.aspect_pairs.append((before, float(track.kalman_state.mean[2])))
        for track in live:
            diag.predicted_boxes[track.track_id] = track.predicted_box

        # First association: all live tracks vs high-confidence detections.
        cost = association.build_stage_matrix(live, d_high, "first", image, cfg,
                                              use_appearance=use_embeddings)
        diag.used_embeddings = bool(
            use_embeddings and any(t.appearance.embedding is not None for t in live)
            and any(d.embedding is not None for d in d_high))
        first = association.hungarian(cost, cfg.min_fused_sim_first)
        outputs: list[tuple[int, int, BoundingBox, float]] = []
        for ti, dj in first.matches:
            track, det = live[ti], d_high[dj]
            self._match_track(track, det, frame_index, image)
            outputs.append((track.track_id, track.class_id, det.box, det.score))
        diag.n_matched_first = len(first.matches)

        # Second association: leftovers vs low-confidence detections.
        remaining = [live[i] for i in first.unmatched_rows]
        cost2 = association.build_stage_matrix(
            remaining, d_low, "second", image, cfg,
            use_appearance=cfg.traditional_second_assoc)
        second = association.hungarian(cost2, cfg.min_fused_sim_second)
        for ti, dj in second.matches:
            track, det = remaining[ti], d_low[dj]
            self._match_track(track, det, frame_index, image)
            outputs.append((track.track_id, track.class_id, det.box, det.score))
        diag.n_matched_second = len(second.matches)

        # Lifecycle for unmatched tracks.
        for i in second.unmatched_rows:
            if remaining[i].mark_missed(cfg.grace_frames):
                diag.n_removed += 1

        # New tracks from unmatched high detections.
        for dj in first.unmatched_cols:
            det = d_high[dj]
            track = self._start_track(det, frame_index, image)
            outputs.append((track.track_id, track.class_id, det.box, det.score))
            diag.n_new_high += 1

        # New tracks from unmatched low detections, gated on appearance
        # similarity against this frame's same-class high detections.
        if cfg.low_init_enabled:
            for dj in second.unmatched_cols:
                det = d_low[dj]
                same_class_high = [d for d in d_high if d.class_id == det.class_id]
                if same_class_high and det.embedding is not None:
                    best = max(
                        (appearance.embedding_similarity(det.embedding, h.embedding)
                         for h in same_class_high if h.embedding is not None),
                        default=None)
                    if best is not None and best <= cfg.rho:
                        continue
                track = self._start_track(det, frame_index, image)
                outputs.append((track.track_id, track.class_id, det.box, det.score))
                diag.n_new_low += 1

        outputs.sort(key=lambda o: o[0])
        self._last_frame_index = frame_index
        self._prev_image = image
        return FrameResult(frame_index, outputs, diag)


def run_sequence(frames, detections_by_frame: dict[int, list[Detection]],
                 config: TrackerConfig | None = None,
                 embeddings: dict[tuple[int, int], np.ndarray] | None = None,
                 handcrafted_fallback: bool = True) -> list[FrameResult]:
    """Track a whole sequence.

    ``frames`` yields (frame_index, image) in increasing order. Every frame
    that has detections must appear in ``frames``.
    """
    tracker = Tracker(config, embeddings, handcrafted_fallback)
    results = []
    seen = set()
    for frame_index, image in frames:
        seen.add(frame_index)
        dets = detections_by_frame.get(frame_index, [])
        results.append(tracker.step(frame_index, image, dets))
    missing = sorted(set(detections_by_frame) - seen)
    if missing:
        raise ValueError(f"detections reference frames with no image: {missing[:5]}")
    return results
