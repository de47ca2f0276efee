"""Tracker configuration and the flat key-value config file format.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored. Scenario files reuse the same grammar plus ``[section]`` headers.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError, ParseError


@dataclass
class TrackerConfig:
    """Every tunable of the association pipeline.

    ``tau`` splits detections into high/low confidence (strictly greater
    goes high). ``rho`` gates new-track initiation from low-confidence
    detections on appearance similarity. ``grace_frames`` is how many
    consecutive unmatched frames a track survives before removal.
    """

    tau: float = 0.7
    rho: float = 0.6
    grace_frames: int = 30
    hist_bins_per_channel: int = 8
    mse_patch_size: tuple[int, int] = (32, 32)
    iou_gate_first: float = 0.1
    iou_gate_second: float = 0.1
    min_fused_sim_first: float = 0.1
    # The second stage multiplies three cues, so an accepted match needs a
    # lower floor than the single-cue first stage.
    min_fused_sim_second: float = 0.05
    embedding_ema_momentum: float = 0.9
    mc_enabled: bool = True
    mc_downscale: int = 2
    low_init_enabled: bool = True
    traditional_second_assoc: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("tau", "rho", "iou_gate_first", "iou_gate_second",
                     "min_fused_sim_first", "min_fused_sim_second",
                     "embedding_ema_momentum"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0,1], got {v}")
        if self.grace_frames < 1:
            raise ConfigError(f"grace_frames must be >= 1, got {self.grace_frames}")
        if self.hist_bins_per_channel < 1 or 256 % self.hist_bins_per_channel != 0:
            raise ConfigError(
                f"hist_bins_per_channel must divide 256, got {self.hist_bins_per_channel}")
        w, h = self.mse_patch_size
        if w < 1 or h < 1:
            raise ConfigError(f"mse_patch_size must be positive, got {self.mse_patch_size}")
        if self.mc_downscale < 1:
            raise ConfigError(f"mc_downscale must be >= 1, got {self.mc_downscale}")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str, source: str | None = None) -> "TrackerConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for lineno, key, value in _iter_kv_lines(text, source):
            if key.startswith("[") and key.endswith("]"):
                raise ConfigError(f"unexpected section {key} in tracker config")
            if key not in known:
                raise ConfigError(f"unknown config key: {key}")
            kwargs[key] = _parse_value(key, value, known[key].type, source, lineno)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "TrackerConfig":
        return cls.from_text(Path(path).read_text(), source=str(path))


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(key: str, raw: str, annotation: str, source, lineno):
    ann = str(annotation)
    try:
        if "bool" in ann:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if "tuple" in ann:
            parts = [p.strip() for p in raw.split(",")]
            return tuple(int(p) for p in parts)
        if "int" in ann:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}"
                          + (f" ({source}:{lineno})" if source else ""))


def _iter_kv_lines(text: str, source=None):
    """Yield (lineno, key, value) for key=value lines; section headers yield
    (lineno, '[name]', '')."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            yield lineno, stripped, ""
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", source, lineno)
        key, value = stripped.split("=", 1)
        yield lineno, key.strip(), value.strip()


def parse_sections(text: str, source: str | None = None):
    """Parse sectioned key-value text.

    Returns (globals_dict, [(section_name, section_dict), ...]) with keys in
    file order. Values stay raw strings; callers coerce.
    """
    top: dict[str, str] = {}
    sections: list[tuple[str, dict[str, str]]] = []
    current: dict[str, str] | None = None
    for lineno, key, value in _iter_kv_lines(text, source):
        if key.startswith("[") and key.endswith("]"):
            current = {}
            sections.append((key[1:-1].strip().lower(), current))
            continue
        if current is None:
            top[key] = value
        else:
            current[key] = value
    return top, sections
