"""Engine configuration: every tunable constant in one frozen dataclass.

Defaults are the shipping values; anything can be overridden from a
flat text file of `key = value` lines (# comments, blank lines ok).
noise_scale 1e-4 is accepted and documented as a no-op under the grid
melody codec (below half a token slice); 0.05 is the audible default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class EngineConfig:
    bpm: float = 120.0
    window_min_events: int = 4
    window_seconds: float = 3.0
    noise_scale: float = 0.05
    loops_before_mutation: int = 1
    restitution: float = 0.8
    rest_threshold: float = 0.05
    v_max: float = 5.0
    kmeans_k: int = 5
    capture_period: float = 5.0
    tick_rate: int = 120
    listen_port: int = 9000
    emit_port: int = 9001
    seed: int = 0
    room_file: str = str(_DATA_DIR / "demo_room.txt")
    corpus_file: str = str(_DATA_DIR / "corpus.txt")
    loop_channel: int = 3
    loop_velocity: int = 96
    loop_program: int = 11
    collision_programs: tuple[int, int, int] = (14, 13, 9)

    def __post_init__(self):
        positive = (
            "bpm", "window_min_events", "window_seconds", "loops_before_mutation",
            "v_max", "kmeans_k", "capture_period", "tick_rate",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive: {getattr(self, name)}")
        for name in ("noise_scale", "rest_threshold"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0: {getattr(self, name)}")
        if not 0.0 <= self.restitution <= 1.0:
            raise ValueError(f"restitution must be in [0,1]: {self.restitution}")
        for name in ("listen_port", "emit_port"):
            if not 1 <= getattr(self, name) <= 65535:
                raise ValueError(f"{name} out of range: {getattr(self, name)}")
        if not 0 <= self.loop_channel <= 15:
            raise ValueError(f"loop_channel out of range: {self.loop_channel}")
        if not 1 <= self.loop_velocity <= 127:
            raise ValueError(f"loop_velocity out of range: {self.loop_velocity}")
        object.__setattr__(self, "collision_programs", tuple(self.collision_programs))
        if len(self.collision_programs) != 3:
            raise ValueError("collision_programs needs exactly 3 entries")
        for p in (self.loop_program, *self.collision_programs):
            if not 0 <= p <= 127:
                raise ValueError(f"program out of range: {p}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(EngineConfig)}


def _parse_value(name: str, raw: str):
    ftype = _FIELD_TYPES[name]
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    if ftype == "str":
        return raw
    # collision_programs: comma-separated ints
    return tuple(int(part.strip()) for part in raw.split(","))


def load_config(path, **overrides) -> EngineConfig:
    """Read a `key = value` file; keyword overrides win over the file."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected `key = value`, got {raw.strip()!r}")
            name, _, value = (part.strip() for part in line.partition("="))
            if name not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown config key {name!r}")
            try:
                values[name] = _parse_value(name, value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {name}: {exc}") from exc
    values.update(overrides)
    return EngineConfig(**values)
