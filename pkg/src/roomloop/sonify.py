"""Collision events to pitched, panned note events.

Pitch tracks the height of the impact (3 octaves, scale-quantized),
velocity tracks impact speed, the MIDI channel identifies the object
kind, and pan/gain come from the listener-relative position using a
constant-power law. Everything here is pure: same inputs, same note.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from roomloop._util import clamp, round_half_up
from roomloop.room import CollisionEvent, Vec3
from roomloop.theory import KeyScale, quantize_to_scale

#: MIDI pitch range of the engine: C3..C6.
PITCH_LO = 48
PITCH_HI = 84
PITCH_SPAN = PITCH_HI - PITCH_LO


@dataclass(frozen=True)
class NoteEvent:
    pitch: int          # MIDI 0..127
    velocity: int       # MIDI 1..127
    channel: int        # 0..15, one per object kind
    pan: float          # -1 (left) .. +1 (right)
    gain: float         # 0..1 distance attenuation
    timestamp: float    # seconds since session start

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch out of range: {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity out of range: {self.velocity}")
        if not 0 <= self.channel <= 15:
            raise ValueError(f"channel out of range: {self.channel}")


@dataclass(frozen=True)
class Listener:
    """Ear position and a horizontal unit forward vector."""

    position: Vec3
    forward: Vec3 = (0.0, 0.0, 1.0)

    def __post_init__(self):
        fx, fy, fz = self.forward
        if abs(fy) > 1e-9:
            raise ValueError("forward must be horizontal (y component 0)")
        norm = math.hypot(fx, fz)
        if abs(norm - 1.0) > 1e-6:
            if norm == 0:
                raise ValueError("forward must be a unit vector")
            object.__setattr__(self, "forward", (fx / norm, 0.0, fz / norm))


def pitch_from_height(height: float, room_height: float, key: KeyScale) -> int:
    """Impact height to a scale-quantized MIDI pitch in C3..C6."""
    if room_height <= 0:
        raise ValueError(f"room_height must be positive: {room_height}")
    raw = round_half_up(PITCH_LO + PITCH_SPAN * clamp(height / room_height, 0.0, 1.0))
    return quantize_to_scale(raw, key)


def velocity_from_speed(speed: float, v_max: float = 5.0) -> int:
    """Impact speed to MIDI velocity, saturating at v_max."""
    if v_max <= 0:
        raise ValueError(f"v_max must be positive: {v_max}")
    return clamp(round_half_up(127 * min(speed / v_max, 1.0)), 1, 127)


def spatialize(position: Vec3, listener: Listener) -> tuple[float, float]:
    """(pan, gain) of a sound source relative to the listener.

    pan = sin of the signed horizontal angle off the forward axis
    (positive to the right), gain = 1/max(1, distance).
    """
    dx = position[0] - listener.position[0]
    dy = position[1] - listener.position[1]
    dz = position[2] - listener.position[2]
    distance = math.sqrt(dx * dx + dy * dy + dz * dz)
    if distance == 0:
        return 0.0, 1.0
    fx, _, fz = listener.forward
    # Signed angle about +y; right = up x forward.
    cross = fz * dx - fx * dz
    dot = fx * dx + fz * dz
    if cross == 0.0 and dot == 0.0:
        pan = 0.0  # straight above or below
    else:
        pan = math.sin(math.atan2(cross, dot))
    return pan, 1.0 / max(1.0, distance)


def stereo_gains(pan: float) -> tuple[float, float]:
    """Constant-power channel gains: gL^2 + gR^2 == 1 for any pan."""
    theta = (pan + 1.0) * math.pi / 4.0
    return math.cos(theta), math.sin(theta)


def sonify(
    event: CollisionEvent,
    listener: Listener,
    key: KeyScale,
    room_height: float,
    v_max: float = 5.0,
) -> NoteEvent:
    """Compose pitch, velocity, and spatialization for one collision."""
    pan, gain = spatialize(event.position, listener)
    return NoteEvent(
        pitch=pitch_from_height(event.position[1], room_height, key),
        velocity=velocity_from_speed(event.speed, v_max),
        channel=int(event.kind),
        pan=pan,
        gain=gain,
        timestamp=event.timestamp,
    )
