"""The conductor: one clock driving physics, sonification, and the loop.

Each tick advances the room by 1/tick_rate s, turns collisions into
notes, feeds the windowing that births base melodies, and plays the
evolving loop on the sixteenth grid. Everything observable crosses a
module boundary as an OSC message, and every message is appended to
an ordered log, so a whole session can be audited (or replayed) from
the log alone. Simulated-time and live mode share this code path; the
only difference is who calls tick() and how fast.

Message timestamps never decrease: loop steps due by the start of a
tick are emitted first with their exact grid times, then physics
events within the tick in time order.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from roomloop.color import dominant_color, rgb_to_keyscale
from roomloop.config import EngineConfig
from roomloop.melody import (
    LoopScheduler,
    MarkovMelodyModel,
    MelodyModel,
    continue_melody,
    reincarnate,
    requantize_to_key,
    window_collisions,
)
from roomloop.midi import DIVISION, MidiRecording
from roomloop.osc import OscMessage
from roomloop.room import (
    CollisionEvent,
    ObjectKind,
    RoomGeometry,
    RoomWorld,
    load_room_file,
    maybe_mutate_gravity,
)
from roomloop.sonify import PITCH_LO, PITCH_SPAN, Listener, sonify
from roomloop.theory import C_MAJOR, KeyScale
from roomloop._util import round_half_up

log = logging.getLogger(__name__)

STEP_TICKS = DIVISION // 4          # MIDI ticks per sixteenth step
COLLISION_NOTE_BEATS = 0.5          # recorded duration of a collision hit


@dataclass(frozen=True)
class LogEntry:
    """One OSC message crossing a module boundary, with session time."""

    time: float
    message: OscMessage

    @property
    def address(self) -> str:
        return self.message.address

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.message.args)


def _msg(address: str, *args: tuple[str, object]) -> OscMessage:
    return OscMessage(address, tuple(args))


@dataclass
class SessionState:
    """Mutable musical state owned by the conductor loop."""

    key: KeyScale = C_MAJOR
    ticks: int = 0
    next_step: int = 0
    window_buffer: list = field(default_factory=list)
    recording: MidiRecording = field(default_factory=MidiRecording)
    bases_created: int = 0


class Engine:
    """Owns the session; all mutation happens through tick() and the
    explicit interaction methods, in call order, on one thread."""

    def __init__(
        self,
        config: EngineConfig | None = None,
        geometry: RoomGeometry | None = None,
        model: MelodyModel | None = None,
    ):
        self.config = config or EngineConfig()
        cfg = self.config
        if geometry is None:
            geometry = load_room_file(cfg.room_file)
        self.world = RoomWorld(
            geometry, restitution=cfg.restitution, rest_threshold=cfg.rest_threshold
        )
        if model is None:
            try:
                model = MarkovMelodyModel.from_corpus_file(cfg.corpus_file)
            except OSError as exc:
                log.warning("melody corpus unavailable (%s); using fallback", exc)
                model = None
        self.model = model
        self.state = SessionState(recording=MidiRecording(bpm=cfg.bpm))
        size = geometry.size
        self.listener = Listener((size[0] / 2.0, 1.6, size[2] / 2.0), (0.0, 0.0, 1.0))
        self._rng_continue = random.Random(cfg.seed * 1000003 + 1)
        self._rng_reincarnate = random.Random(cfg.seed * 1000003 + 2)
        self._rng_gravity = random.Random(cfg.seed * 1000003 + 3)
        self.kmeans_seed = cfg.seed * 1000003 + 4
        self.scheduler = _make_scheduler(self)
        self.osc_log: list[LogEntry] = []
        self.grid = 60.0 / cfg.bpm / 4.0
        self.dt = 1.0 / cfg.tick_rate

    # -- clock -------------------------------------------------------

    @property
    def now(self) -> float:
        return self.state.ticks * self.dt

    def tick(self) -> list[LogEntry]:
        """Advance one tick; return the log entries it produced."""
        mark = len(self.osc_log)
        start = self.now
        while self.state.next_step * self.grid <= start + 1e-9:
            self._play_step(self.state.next_step)
            self.state.next_step += 1
        events = self.world.step(self.dt)
        events.sort(key=lambda e: e.timestamp)
        for event in events:
            self._on_collision(event)
        self.state.ticks += 1
        self._prune_window()
        self._maybe_create_base()
        return self.osc_log[mark:]

    def run_seconds(self, seconds: float) -> None:
        for _ in range(round(seconds * self.config.tick_rate)):
            self.tick()

    # -- loop playback -----------------------------------------------

    def _play_step(self, step: int) -> None:
        t = step * self.grid
        cfg = self.config
        for note in self.scheduler.on_step(step):
            self._log(t, _msg(
                "/mr4mr/note",
                ("i", cfg.loop_channel), ("i", note.pitch), ("i", cfg.loop_velocity),
                ("f", 0.0), ("f", 1.0),
            ))
            height = (note.pitch - PITCH_LO) / PITCH_SPAN * self.world.geometry.height
            self._log(t, _msg("/mr4mr/wave", ("f", height), ("i", note.pitch)))
            self._ensure_program(cfg.loop_channel, cfg.loop_program)
            self.state.recording.add_note(
                step * STEP_TICKS, (step + note.duration_steps) * STEP_TICKS,
                cfg.loop_channel, note.pitch, cfg.loop_velocity,
            )

    # -- collisions --------------------------------------------------

    def _on_collision(self, event: CollisionEvent) -> None:
        cfg = self.config
        self._log(event.timestamp, _msg(
            "/mr4mr/collision",
            ("i", int(event.kind)), ("f", event.speed),
            ("f", event.position[0]), ("f", event.position[1]), ("f", event.position[2]),
        ))
        note = sonify(
            event, self.listener, self.state.key,
            self.world.geometry.height, v_max=cfg.v_max,
        )
        self._log(event.timestamp, _msg(
            "/mr4mr/note",
            ("i", note.channel), ("i", note.pitch), ("i", note.velocity),
            ("f", note.pan), ("f", note.gain),
        ))
        channel = int(event.kind)
        self._ensure_program(channel, cfg.collision_programs[channel])
        tick_on = round_half_up(event.timestamp * cfg.bpm / 60.0 * DIVISION)
        tick_off = tick_on + round(COLLISION_NOTE_BEATS * DIVISION)
        self.state.recording.add_note(tick_on, tick_off, channel, note.pitch, note.velocity)
        self.state.window_buffer.append(note)
        mutated = maybe_mutate_gravity(event, self._rng_gravity)
        if mutated is not None:
            self.world.gravity = mutated
            self._log(event.timestamp, _msg(
                "/mr4mr/gravity",
                ("f", mutated.g[0]), ("f", mutated.g[1]), ("f", mutated.g[2]),
            ))

    # -- base melody creation ----------------------------------------

    def _prune_window(self) -> None:
        horizon = self.now - self.config.window_seconds
        buf = self.state.window_buffer
        if buf and buf[0].timestamp < horizon:
            self.state.window_buffer = [e for e in buf if e.timestamp >= horizon]

    def _maybe_create_base(self) -> None:
        cfg = self.config
        base = window_collisions(
            self.state.window_buffer, bpm=cfg.bpm,
            min_events=cfg.window_min_events, window_seconds=cfg.window_seconds,
        )
        if base is None:
            return
        melody = continue_melody(base, self.model, self.state.key, self._rng_continue)
        melody = requantize_to_key(melody, self.state.key)
        self.scheduler.set_pending(melody)
        self.state.window_buffer.clear()
        self.state.bases_created += 1

    # -- scene color -------------------------------------------------

    def on_scene_color(self, rgb: tuple[int, int, int]) -> KeyScale:
        """Apply a dominant scene color; returns the (possibly new) key.

        The collision-quantization key changes immediately; the loop is
        requantized at the next bar boundary. Same color or same key
        twice in a row changes nothing.
        """
        r, g, b = (int(c) for c in rgb)
        if not all(0 <= c <= 255 for c in (r, g, b)):
            raise ValueError(f"RGB out of range: {rgb}")
        self._log(self.now, _msg(
            "/mr4mr/scene/color", ("i", r), ("i", g), ("i", b)
        ))
        key, box = rgb_to_keyscale((r, g, b))
        if key == self.state.key:
            return key
        log.info("scene color %s (%s) -> key %s", (r, g, b), box, key.name)
        self.state.key = key
        self.scheduler.request_key(key)
        self._log(self.now, _msg(
            "/mr4mr/key", ("i", key.tonic), ("s", key.mode.value)
        ))
        return key

    def analyze_frame(self, pixels) -> KeyScale:
        """Dominant color of a captured frame drives the key."""
        rgb = dominant_color(pixels, k=self.config.kmeans_k, seed=self.kmeans_seed)
        return self.on_scene_color(rgb)

    # -- interactions (scenario runner, UI bridge) -------------------

    def spawn(self, object_id: str, kind: ObjectKind, position, radius: float = 0.15):
        return self.world.spawn(object_id, kind, position, radius=radius)

    def apply_impulse(self, object_id: str, impulse) -> None:
        self.world.apply_impulse(object_id, impulse)

    def grab_move(self, object_id: str, position) -> bool:
        return self.world.grab_move(object_id, position)

    def release(self, object_id: str, impulse=(0.0, 0.0, 0.0)) -> None:
        self.world.release(object_id, impulse)

    def set_listener(self, position, forward) -> None:
        self.listener = Listener(tuple(position), tuple(forward))

    # -- recording ---------------------------------------------------

    def finalize(self) -> MidiRecording:
        self.state.recording.finalize()
        return self.state.recording

    def _ensure_program(self, channel: int, program: int) -> None:
        if channel not in self.state.recording.programs:
            self.state.recording.set_program(channel, program)

    def _log(self, time: float, message: OscMessage) -> None:
        self.osc_log.append(LogEntry(time, message))


def _make_scheduler(engine: Engine) -> LoopScheduler:
    def mutate(seq):
        # keep the evolving loop inside the ambient key
        drifted = reincarnate(
            seq, engine.config.noise_scale, engine._rng_reincarnate, engine.model
        )
        return requantize_to_key(drifted, engine.state.key)

    return LoopScheduler(
        mutate=mutate,
        requantize=requantize_to_key,
        loops_before_mutation=engine.config.loops_before_mutation,
    )
