"""Pitch classes, keys, and scale quantization shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

PITCH_CLASS_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

MAJOR_INTERVALS = (0, 2, 4, 5, 7, 9, 11)
MINOR_INTERVALS = (0, 2, 3, 5, 7, 8, 10)  # natural minor


class Mode(str, Enum):
    MAJOR = "major"
    MINOR = "minor"


@dataclass(frozen=True)
class KeyScale:
    """A tonal center: tonic pitch class (C=0 .. B=11) plus major/minor mode."""

    tonic: int
    mode: Mode

    def __post_init__(self):
        if not 0 <= self.tonic <= 11:
            raise ValueError(f"tonic out of range 0..11: {self.tonic}")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def name(self) -> str:
        """Display name, e.g. ``"B Major"``."""
        return f"{PITCH_CLASS_NAMES[self.tonic]} {self.mode.value.capitalize()}"


C_MAJOR = KeyScale(0, Mode.MAJOR)


def scale_set(key: KeyScale) -> frozenset[int]:
    """The seven pitch classes of the key (natural minor for minor mode)."""
    intervals = MAJOR_INTERVALS if key.mode is Mode.MAJOR else MINOR_INTERVALS
    return frozenset((key.tonic + i) % 12 for i in intervals)


def quantize_to_scale(pitch: int, key: KeyScale, lo: int = 0, hi: int = 127) -> int:
    """Snap a MIDI pitch to the nearest scale member within [lo, hi].

    Distance ties break downward (the lower candidate wins).
    """
    members = scale_set(key)
    candidates = [p for p in range(lo, hi + 1) if p % 12 in members]
    if not candidates:
        raise ValueError(f"no scale member of {key.name} in [{lo}, {hi}]")
    return min(candidates, key=lambda p: (abs(p - pitch), p))
