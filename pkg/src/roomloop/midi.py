"""Linear MIDI recording and Standard MIDI File (format 0) export.

The engine appends every sounded note to one recording; export writes
a single-track SMF at 480 ticks per quarter with a tempo meta event
and one program change per used channel. Running status is never
used, so each event carries its status byte. Note ticks are computed
by the caller; this module only guarantees ordering (tick, offs
before ons at the same tick, then insertion order) and pairing
(unmatched note-ons are closed at the end of the track with a
warning rather than corrupting the file).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

DIVISION = 480  # ticks per quarter note


def vlq(value: int) -> bytes:
    """Variable-length quantity used for delta times."""
    if value < 0:
        raise ValueError(f"negative delta: {value}")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


@dataclass(frozen=True)
class TimedNote:
    tick_on: int
    tick_off: int
    channel: int
    pitch: int
    velocity: int

    def __post_init__(self):
        if self.tick_on < 0 or self.tick_off < self.tick_on:
            raise ValueError(f"bad note span {self.tick_on}..{self.tick_off}")
        if not 0 <= self.channel <= 15:
            raise ValueError(f"channel out of range: {self.channel}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch out of range: {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity out of range: {self.velocity}")


@dataclass
class MidiRecording:
    """Accumulates notes; channel programs are set once at export."""

    bpm: float = 120.0
    programs: dict[int, int] = field(default_factory=dict)
    notes: list[TimedNote] = field(default_factory=list)
    _open: dict[int, list[tuple[int, int, int]]] = field(default_factory=dict)
    _seq: int = 0

    def set_program(self, channel: int, program: int) -> None:
        if not 0 <= program <= 127:
            raise ValueError(f"program out of range: {program}")
        self.programs[channel] = program

    def add_note(self, tick_on: int, tick_off: int, channel: int, pitch: int, velocity: int) -> None:
        self.notes.append(TimedNote(tick_on, tick_off, channel, pitch, velocity))

    def note_on(self, tick: int, channel: int, pitch: int, velocity: int) -> None:
        """Streaming interface; pair with note_off on the same channel+pitch."""
        key = channel << 8 | pitch
        self._open.setdefault(key, []).append((tick, velocity, self._seq))
        self._seq += 1

    def note_off(self, tick: int, channel: int, pitch: int) -> None:
        key = channel << 8 | pitch
        stack = self._open.get(key)
        if not stack:
            log.warning("note-off without note-on: ch=%d pitch=%d", channel, pitch)
            return
        tick_on, velocity, _ = stack.pop(0)
        self.add_note(tick_on, max(tick, tick_on), channel, pitch, velocity)

    def finalize(self) -> None:
        """Close any dangling note-ons one beat after the last event."""
        if not any(self._open.values()):
            self._open.clear()
            return
        last = max((n.tick_off for n in self.notes), default=0)
        for key, stack in sorted(self._open.items()):
            for tick_on, velocity, _ in stack:
                log.warning(
                    "auto-closing unmatched note-on: ch=%d pitch=%d tick=%d",
                    key >> 8, key & 0xFF, tick_on,
                )
                end = max(last, tick_on + DIVISION)
                self.add_note(tick_on, end, key >> 8, key & 0xFF, velocity)
        self._open.clear()


def encode_smf(recording: MidiRecording) -> bytes:
    """Serialize to SMF format 0 bytes. Call finalize() first when streaming."""
    if any(recording._open.values()):
        recording.finalize()
    tempo = int(round(60_000_000 / recording.bpm))
    # (tick, order_class, seq) sort key; offs precede ons at equal ticks
    events: list[tuple[int, int, int, bytes]] = []
    seq = 0
    for channel in sorted(recording.programs):
        events.append((0, 0, seq, bytes([0xC0 | channel, recording.programs[channel]])))
        seq += 1
    for note in recording.notes:
        events.append((note.tick_on, 2, seq, bytes([0x90 | note.channel, note.pitch, note.velocity])))
        events.append((note.tick_off, 1, seq, bytes([0x80 | note.channel, note.pitch, 0])))
        seq += 1
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    track = bytearray()
    track += vlq(0) + bytes([0xFF, 0x51, 0x03]) + tempo.to_bytes(3, "big")
    cursor = 0
    for tick, _, _, payload in events:
        track += vlq(tick - cursor) + payload
        cursor = tick
    track += vlq(0) + bytes([0xFF, 0x2F, 0x00])

    header = b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
    header += (1).to_bytes(2, "big") + DIVISION.to_bytes(2, "big")
    return header + b"MTrk" + len(track).to_bytes(4, "big") + bytes(track)


def export_midi(recording: MidiRecording, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_smf(recording))
