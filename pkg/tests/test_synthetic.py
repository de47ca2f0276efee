import hashlib
import math
from pathlib import Path

import numpy as np
import pytest

from sftrack.errors import ConfigError
from sftrack.io_formats import read_mot_detections, read_visdrone
from sftrack.synthetic import (CameraSpec, NoiseSpec, ObjectSpec, ScenarioSpec,
                               build_annotations, camera_transforms, generate,
                               parse_scenario, preset, render_frame,
                               write_scenario)


def tiny_spec(**kwargs):
    defaults = dict(
        name="tiny", seed=9, frames=6, width=160, height=120,
        objects=[
            ObjectSpec(class_id=4, width=24, height=20, x=50, y=40, color=(200, 60, 60)),
            ObjectSpec(class_id=4, width=20, height=22, x=110, y=80,
                       path="linear", vx=-1.0, vy=0.5, color=(60, 80, 200)),
        ])
    defaults.update(kwargs)
    return ScenarioSpec(**defaults)


def dir_digest(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


class TestDeterminism:
    def test_identical_digests(self, tmp_path):
        spec = tiny_spec()
        generate(spec, tmp_path / "a")
        generate(spec, tmp_path / "b")
        da, db = dir_digest(tmp_path / "a"), dir_digest(tmp_path / "b")
        assert da == db
        assert len(da) == 6 + 3  # frames + gt + det + manifest

    def test_seed_changes_output(self, tmp_path):
        generate(tiny_spec(), tmp_path / "a")
        generate(tiny_spec(seed=10), tmp_path / "b")
        assert dir_digest(tmp_path / "a") != dir_digest(tmp_path / "b")


class TestZeroNoise:
    def test_detections_equal_gt_with_full_confidence(self, tmp_path):
        out = tmp_path / "seq"
        generate(tiny_spec(), out)
        gt = read_visdrone(out / "gt.txt", mode="gt")
        det = read_mot_detections(out / "det.txt")
        for frame, rows in gt.items():
            boxes_gt = {(r.box.left, r.box.top, r.box.width, r.box.height) for r in rows}
            boxes_det = {(d.box.left, d.box.top, d.box.width, d.box.height)
                         for d in det[frame]}
            assert boxes_gt == boxes_det
            assert all(d.score == 1.0 for d in det[frame])


class TestConfidenceCurve:
    def test_curve_shape(self):
        noise = NoiseSpec(conf_floor=0.3, conf_ceil=0.95, conf_knee_area=1000.0)
        # base(a) = 0.3 + 0.65 * a / 1000, saturating at the knee
        assert noise.base_confidence(0) == pytest.approx(0.3)
        assert noise.base_confidence(500) == pytest.approx(0.625)
        assert noise.base_confidence(1000) == pytest.approx(0.95)
        assert noise.base_confidence(5000) == pytest.approx(0.95)
        for area in (40, 120, 300, 600):
            assert noise.base_confidence(area) < 0.7

    def test_spec_scores_below_tau(self, tmp_path):
        objs = [ObjectSpec(class_id=1, width=8, height=10, x=30 + 25 * i, y=40,
                           color=(150, 60, 60)) for i in range(4)]
        spec = tiny_spec(objects=objs,
                         noise=NoiseSpec(conf_floor=0.3, conf_ceil=0.95,
                                         conf_knee_area=1000.0, conf_noise=0.02,
                                         conf_clamp_lo=0.05, conf_clamp_hi=0.99))
        _gt, dets, _m, _w = build_annotations(spec)
        scores = [d.score for rows in dets.values() for d in rows]
        assert scores and max(scores) < 0.7


class TestCameraMotion:
    def test_translation_moves_content_opposite(self):
        spec = tiny_spec(camera=CameraSpec(pattern="linear", trans_amp_x=5.0))
        gt, _d, motions, w2i = build_annotations(spec)
        static_box = {f: [r for r in gt[f] if r.obj_id == 1][0].box for f in gt}
        for f in range(2, spec.frames + 1):
            assert static_box[f].left - static_box[f - 1].left == pytest.approx(-5.0, abs=1e-9)
            assert static_box[f].width == pytest.approx(static_box[f - 1].width, abs=1e-9)

    def test_motion_equals_inverse_camera(self):
        spec = tiny_spec(camera=CameraSpec(pattern="zigzag", rot_amp_deg=2.0,
                                           trans_amp_x=4.0, trans_amp_y=3.0,
                                           scale_amp=0.01))
        _gt, _d, motions, w2i = build_annotations(spec)
        center = (spec.width / 2, spec.height / 2)
        for k in range(2, spec.frames + 1):
            scale, rot, tx, ty = spec.camera.delta_params(k)
            from sftrack.motion import AffineTransform2D
            cam = AffineTransform2D.similarity(scale, math.radians(rot), (tx, ty), center)
            expected = cam.inverse()
            got = motions[k - 1]
            assert np.allclose(got.linear, expected.linear, atol=1e-12)
            assert np.allclose(got.translation, expected.translation, atol=1e-9)

    def test_cumulative_composition(self):
        spec = tiny_spec(camera=CameraSpec(pattern="sinusoid", trans_amp_x=6.0,
                                           period=10.0))
        _gt, _d, motions, w2i = build_annotations(spec)
        p = np.array([30.0, 40.0])
        for k in range(2, spec.frames + 1):
            a = w2i[k - 1].apply(p)
            b = motions[k - 1].apply(w2i[k - 2].apply(p))
            assert np.allclose(a, b, atol=1e-9)


class TestOcclusion:
    def test_confidence_dips_behind_band(self):
        from sftrack.synthetic import OccluderSpec
        spec = tiny_spec(
            frames=30,
            objects=[ObjectSpec(class_id=4, width=20, height=18, x=20, y=60,
                                path="linear", vx=4.0, color=(200, 60, 60))],
            occluders=[OccluderSpec(x=80, y=60, width=24, height=120,
                                    color=(30, 30, 30))],
            noise=NoiseSpec(conf_floor=0.9, conf_ceil=0.9, conf_knee_area=1.0,
                            occlusion_penalty=0.6, occlusion_drop=0.95))
        _gt, dets, _m, _w = build_annotations(spec)
        scores = {f: rows[0].score if rows else None for f, rows in dets.items()}
        assert scores[2] == pytest.approx(0.9)
        assert min(s for s in scores.values() if s is not None) < 0.5


class TestSpecFiles:
    def test_round_trip(self, tmp_path):
        spec = tiny_spec(camera=CameraSpec(pattern="zigzag", rot_amp_deg=1.5,
                                           trans_amp_x=3.0))
        path = tmp_path / "scenario.cfg"
        write_scenario(spec, path)
        parsed = parse_scenario(path.read_text(), source=str(path))
        assert parsed == spec

    def test_missing_seed_rejected(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_scenario("frames = 5\nwidth = 64\nheight = 48\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="wibble"):
            parse_scenario("seed = 1\nwibble = 2\n")


class TestPresets:
    def test_known_names(self):
        for name in ("baseline", "fast_camera", "occlusion", "small_objects"):
            spec = preset(name)
            assert spec.frames >= 60
            assert spec.width == 640 and spec.height == 480

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="nope"):
            preset("nope")

    def test_baseline_noise_off(self):
        spec = preset("baseline")
        assert len(spec.objects) == 5
        assert spec.camera.pattern == "static"
        assert spec.noise == NoiseSpec()

    def test_fast_camera_amplitudes(self):
        spec = preset("fast_camera")
        assert spec.camera.rot_amp_deg == 3.0
        assert max(spec.camera.trans_amp_x, spec.camera.trans_amp_y) <= 15.0

    def test_small_objects_definition(self):
        spec = preset("small_objects")
        heights = [o.height for o in spec.objects]
        assert min(heights) >= 8 and max(heights) <= 14
        _gt, dets, _m, _w = build_annotations(spec)
        scores = [d.score for rows in dets.values() for d in rows]
        assert 0.30 <= min(scores) and max(scores) <= 0.65

    def test_render_has_texture(self):
        spec = preset("baseline")
        _m, w2i = camera_transforms(spec)
        img = render_frame(spec, 1, w2i[0])
        assert img.std() > 10  # textured, not flat
