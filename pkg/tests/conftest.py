"""Shared fixtures: synthetic presets are generated once per session and
tracker runs over them are cached by configuration."""

from pathlib import Path

import pytest

from sftrack import synthetic
from sftrack import tracker as tracker_mod
from sftrack.cli import results_to_frames
from sftrack.config import TrackerConfig
from sftrack.io_formats import load_sequence, read_mot_detections, read_visdrone


class PresetStore:
    def __init__(self, root: Path):
        self.root = root
        self._generated: dict[str, synthetic.GenerationResult] = {}
        self._runs: dict[tuple, list] = {}

    def generation(self, name: str) -> synthetic.GenerationResult:
        if name not in self._generated:
            self._generated[name] = synthetic.generate(
                synthetic.preset(name), self.root / name)
        return self._generated[name]

    def gt(self, name: str):
        return read_visdrone(self.generation(name).gt_path, mode="gt")

    def detections(self, name: str):
        return read_mot_detections(self.generation(name).det_path)

    def run(self, name: str, mc: bool = True, low_init: bool = True,
            traditional: bool = True, embeddings: bool = True) -> list:
        """Cached full-sequence tracker run, reading frames from disk."""
        key = (name, mc, low_init, traditional, embeddings)
        if key not in self._runs:
            self._runs[key] = self.run_fresh(name, mc, low_init, traditional, embeddings)
        return self._runs[key]

    def run_fresh(self, name: str, mc: bool = True, low_init: bool = True,
                  traditional: bool = True, embeddings: bool = True) -> list:
        gen = self.generation(name)
        sequence = load_sequence(gen.directory)
        config = TrackerConfig(mc_enabled=mc, low_init_enabled=low_init,
                               traditional_second_assoc=traditional)
        frames = ((k, sequence.read_frame(k))
                  for k in range(1, len(sequence.frame_paths) + 1))
        return tracker_mod.run_sequence(frames, self.detections(name), config,
                                        handcrafted_fallback=embeddings)

    def hyp(self, name: str, **kwargs):
        return results_to_frames(self.run(name, **kwargs))


@pytest.fixture(scope="session")
def presets(tmp_path_factory) -> PresetStore:
    return PresetStore(tmp_path_factory.mktemp("presets"))
