import numpy as np
import pytest

from sftrack.config import TrackerConfig
from sftrack.tracker import Tracker, TrackStatus, run_sequence
from sftrack.types import BoundingBox, Detection


def textured_frame(seed=0, h=120, w=160):
    rng = np.random.default_rng(seed)
    return rng.integers(40, 220, size=(h, w, 3)).astype(np.uint8)


FRAME = textured_frame()


def det(frame, x, y, w=20, h=20, score=0.9, cls=0):
    return Detection(frame, BoundingBox(x, y, w, h), score, cls)


def config(**kwargs):
    base = dict(mc_enabled=False)
    base.update(kwargs)
    return TrackerConfig(**base)


class TestBasics:
    def test_first_detection_starts_track(self):
        t = Tracker(config())
        r = t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        assert len(r.outputs) == 1
        track_id, cls, box, score = r.outputs[0]
        assert track_id == 1
        assert score == 0.9
        assert r.diagnostics.n_new_high == 1

    def test_empty_stream_no_tracks(self):
        frames = ((k, FRAME) for k in range(1, 6))
        results = run_sequence(frames, {}, config())
        assert all(not r.outputs for r in results)

    def test_frame_order_enforced(self):
        t = Tracker(config())
        t.step(2, FRAME, [])
        with pytest.raises(ValueError, match="not increasing"):
            t.step(2, FRAME, [])

    def test_wrong_frame_detection_rejected(self):
        t = Tracker(config())
        with pytest.raises(ValueError, match="frame 3"):
            t.step(1, FRAME, [det(3, 10, 10)])


class TestSecondAssociation:
    def test_low_score_redetection_keeps_identity(self):
        # High-confidence birth, then a low-confidence re-detection next to
        # the prediction is matched in the second stage.
        t = Tracker(config())
        r1 = t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        tid = r1.outputs[0][0]
        r2 = t.step(2, FRAME, [det(2, 51, 40, score=0.4)])
        assert r2.diagnostics.n_matched_second == 1
        assert r2.outputs[0][0] == tid
        assert t.tracks[0].status is TrackStatus.ACTIVE
        assert t.tracks[0].miss_count == 0

    def test_score_equal_tau_goes_low(self):
        t = Tracker(config())
        r = t.step(1, FRAME, [det(1, 50, 40, score=0.7)])
        assert r.diagnostics.n_low == 1
        assert r.diagnostics.n_high == 0

    def test_iou_only_when_traditional_off(self):
        cfg = config(traditional_second_assoc=False)
        t = Tracker(cfg, handcrafted_fallback=False)
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        r2 = t.step(2, FRAME, [det(2, 51, 40, score=0.4)])
        assert r2.diagnostics.n_matched_second == 1


class TestLifecycle:
    def test_removed_at_grace(self):
        cfg = config(grace_frames=5)
        t = Tracker(cfg)
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        for k in range(2, 6):
            t.step(k, FRAME, [])
        assert t.tracks[0].miss_count == 4
        assert t.tracks[0].status is TrackStatus.LOST
        r = t.step(6, FRAME, [])
        assert t.tracks[0].status is TrackStatus.REMOVED
        assert r.diagnostics.n_removed == 1

    def test_thirty_frame_grace_default(self):
        t = Tracker(config())
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        for k in range(2, 31):
            t.step(k, FRAME, [])
        assert t.tracks[0].status is TrackStatus.LOST
        t.step(31, FRAME, [])  # 30th consecutive miss
        assert t.tracks[0].status is TrackStatus.REMOVED

    def test_lost_track_rematches_and_resets(self):
        t = Tracker(config())
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        t.step(2, FRAME, [])
        assert t.tracks[0].status is TrackStatus.LOST
        r = t.step(3, FRAME, [det(3, 50, 40, score=0.9)])
        assert t.tracks[0].status is TrackStatus.ACTIVE
        assert t.tracks[0].miss_count == 0
        assert r.outputs[0][0] == 1

    def test_ids_never_reused(self):
        cfg = config(grace_frames=1)
        t = Tracker(cfg)
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        t.step(2, FRAME, [])  # removed immediately
        assert t.tracks[0].status is TrackStatus.REMOVED
        r = t.step(3, FRAME, [det(3, 50, 40, score=0.9)])
        assert r.outputs[0][0] == 2

    def test_outputs_only_matched_tracks(self):
        t = Tracker(config())
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        r = t.step(2, FRAME, [])
        assert r.outputs == []


class TestLowInitiation:
    def test_disabled_all_low_scene_yields_nothing(self):
        cfg = config(low_init_enabled=False)
        t = Tracker(cfg)
        for k in range(1, 6):
            r = t.step(k, FRAME, [det(k, 50, 40, score=0.5)])
            assert r.outputs == []
        assert t.tracks == []

    def test_enabled_all_low_scene_tracks(self):
        cfg = config(low_init_enabled=True)
        t = Tracker(cfg)
        r1 = t.step(1, FRAME, [det(1, 50, 40, score=0.5)])
        assert r1.diagnostics.n_new_low == 1
        r2 = t.step(2, FRAME, [det(2, 51, 40, score=0.5)])
        assert r2.outputs[0][0] == r1.outputs[0][0]

    def test_rho_gate_blocks_dissimilar_low(self):
        # A same-class high detection exists but looks nothing like the low
        # detection, so the appearance gate blocks initiation.
        frame = np.zeros((120, 160, 3), dtype=np.uint8)
        frame[:, :, 0] = 30
        frame[40:60, 50:70] = (250, 10, 10)    # red high target
        frame[80:100, 120:140] = (10, 10, 250)  # blue low target
        cfg = config(rho=0.6)
        t = Tracker(cfg)
        r = t.step(1, frame, [det(1, 50, 40, score=0.9),
                              det(1, 120, 80, score=0.5)])
        assert r.diagnostics.n_new_high == 1
        assert r.diagnostics.n_new_low == 0

    def test_rho_gate_admits_similar_low(self):
        frame = np.zeros((120, 160, 3), dtype=np.uint8)
        frame[:, :, 0] = 30
        frame[40:60, 50:70] = (250, 10, 10)
        frame[80:100, 120:140] = (245, 12, 12)  # near-identical appearance
        cfg = config(rho=0.6)
        t = Tracker(cfg)
        r = t.step(1, frame, [det(1, 50, 40, score=0.9),
                              det(1, 120, 80, score=0.5)])
        assert r.diagnostics.n_new_low == 1


class TestByteEquivalence:
    def test_embeddings_unused_without_provider(self):
        cfg = config(low_init_enabled=False, traditional_second_assoc=False)
        t = Tracker(cfg, embeddings=None, handcrafted_fallback=False)
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        r = t.step(2, FRAME, [det(2, 52, 40, score=0.9)])
        assert not r.diagnostics.used_embeddings
        assert r.diagnostics.n_matched_first == 1

    def test_embeddings_used_with_fallback_provider(self):
        t = Tracker(config())
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        r = t.step(2, FRAME, [det(2, 52, 40, score=0.9)])
        assert r.diagnostics.used_embeddings


class TestClassPartition:
    def test_cross_class_never_matches(self):
        t = Tracker(config())
        t.step(1, FRAME, [det(1, 50, 40, score=0.9, cls=1)])
        r = t.step(2, FRAME, [det(2, 50, 40, score=0.9, cls=2)])
        # same place, different class: old track unmatched, new track created
        assert r.diagnostics.n_matched_first == 0
        assert r.diagnostics.n_new_high == 1


class TestRunSequence:
    def test_missing_image_for_detections(self):
        frames = [(1, FRAME)]
        dets = {1: [det(1, 10, 10)], 5: [det(5, 10, 10)]}
        with pytest.raises(ValueError, match="no image"):
            run_sequence(iter(frames), dets, config())

    def test_deterministic(self):
        dets = {k: [det(k, 40 + k, 40, score=0.9)] for k in range(1, 8)}
        out1 = run_sequence(((k, FRAME) for k in range(1, 8)), dets, config())
        out2 = run_sequence(((k, FRAME) for k in range(1, 8)), dets, config())
        assert [(r.frame, r.outputs) for r in out1] == [(r.frame, r.outputs) for r in out2]


class TestFileEmbeddings:
    def test_embedding_table_applied(self):
        e1 = np.zeros(4); e1[0] = 1.0
        e2 = np.zeros(4); e2[1] = 1.0
        table = {(1, 0): e1, (2, 0): e1}
        t = Tracker(config(), embeddings=table, handcrafted_fallback=False)
        t.step(1, FRAME, [det(1, 50, 40, score=0.9)])
        r = t.step(2, FRAME, [det(2, 52, 40, score=0.9)])
        assert r.diagnostics.used_embeddings
        assert r.diagnostics.n_matched_first == 1
