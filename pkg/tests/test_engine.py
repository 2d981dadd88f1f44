"""Conductor behavior: one clock, ordered log, windowing, key changes."""

import numpy as np
import pytest

from roomloop.config import EngineConfig
from roomloop.engine import STEP_TICKS, Engine
from roomloop.midi import DIVISION
from roomloop.room import ObjectKind, RoomGeometry
from roomloop.theory import KeyScale, Mode, scale_set

BARE = RoomGeometry((4.0, 3.0, 5.0), ())


def make_engine(**overrides):
    return Engine(EngineConfig(**overrides), geometry=BARE)


def entries(engine, address):
    return [e for e in engine.osc_log if e.address == address]


def test_dropped_ball_produces_collisions_then_a_loop():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(8.0)

    collisions = entries(engine, "/mr4mr/collision")
    assert len(collisions) >= 4
    assert engine.state.bases_created >= 1

    loop_notes = [
        e for e in entries(engine, "/mr4mr/note")
        if e.values[0] == engine.config.loop_channel
    ]
    assert loop_notes, "base melody never started playing"
    grid = engine.grid
    for e in loop_notes:
        steps = e.time / grid
        assert abs(steps - round(steps)) < 1e-6  # loop rides the sixteenth grid
    # the swap happens on a bar boundary
    first = min(e.time for e in loop_notes)
    assert (first / grid) % 16 == pytest.approx(0.0, abs=1e-6)

    waves = entries(engine, "/mr4mr/wave")
    assert len(waves) == len(loop_notes)
    height = engine.world.geometry.height
    for w in waves:
        assert 0.0 <= w.values[0] <= height


def test_log_timestamps_never_decrease():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.spawn("c", ObjectKind.TYPE_B, (1.0, 2.0, 1.0))
    engine.apply_impulse("c", (2.0, 0.0, 1.5))
    engine.run_seconds(8.0)
    times = [e.time for e in engine.osc_log]
    assert all(b >= a - 1e-9 for a, b in zip(times, times[1:]))
    assert len(times) > 20


def test_collision_messages_carry_kind_speed_position():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_B, (2.0, 1.15, 2.5))
    engine.run_seconds(1.0)
    coll = entries(engine, "/mr4mr/collision")[0]
    kind, speed, x, y, z = coll.values
    assert kind == int(ObjectKind.TYPE_B)
    assert speed > 3.0  # roughly sqrt(2g)
    assert (x, y, z) == (2.0, 0.0, 2.5)  # contact point on the floor
    note = next(
        e for e in entries(engine, "/mr4mr/note") if e.time == coll.time
    )
    assert note.values[0] == int(ObjectKind.TYPE_B)  # channel tracks the kind
    assert 1 <= note.values[2] <= 127


def test_loop_steps_precede_physics_within_a_tick():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(8.0)
    # whenever a loop note and a collision share a tick, the loop note is
    # logged first and carries the earlier (grid) timestamp
    log = engine.osc_log
    for a, b in zip(log, log[1:]):
        if a.address == "/mr4mr/collision" and b.address == "/mr4mr/note":
            assert b.values[0] != engine.config.loop_channel or b.time >= a.time


def test_scene_color_changes_key_once():
    engine = make_engine()
    key = engine.on_scene_color((40, 60, 220))
    assert key == KeyScale(11, Mode.MAJOR)
    assert engine.state.key == key
    assert len(entries(engine, "/mr4mr/key")) == 1
    tonic, mode = entries(engine, "/mr4mr/key")[0].values
    assert (tonic, mode) == (11, "major")

    engine.on_scene_color((40, 60, 220))  # same color: logged, no key event
    assert len(entries(engine, "/mr4mr/scene/color")) == 2
    assert len(entries(engine, "/mr4mr/key")) == 1

    engine.on_scene_color((45, 65, 225))  # different color, same box
    assert len(entries(engine, "/mr4mr/key")) == 1


def test_scene_color_validates_rgb():
    engine = make_engine()
    with pytest.raises(ValueError):
        engine.on_scene_color((300, 0, 0))


def test_key_change_applies_to_collisions_immediately():
    engine = make_engine()
    engine.on_scene_color((40, 60, 220))  # B major
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(1.0)
    members = scale_set(KeyScale(11, Mode.MAJOR))
    collision_notes = [
        e for e in entries(engine, "/mr4mr/note")
        if e.values[0] == int(ObjectKind.TYPE_A)
    ]
    assert collision_notes
    assert all(e.values[1] % 12 in members for e in collision_notes)


def test_analyze_frame_uniform_blue():
    engine = make_engine()
    frame = np.full((32, 32, 3), (40, 60, 220), dtype=np.uint8)
    key = engine.analyze_frame(frame)
    assert key.name == "B Major"


def test_type_c_collision_mutates_gravity():
    engine = make_engine()
    engine.spawn("c", ObjectKind.TYPE_C, (2.0, 1.15, 2.5))
    engine.run_seconds(1.0)
    gravity_msgs = entries(engine, "/mr4mr/gravity")
    assert gravity_msgs
    gx, gy, gz = gravity_msgs[0].values
    assert gx == 0.0 and gz == 0.0
    assert -12.0 <= gy <= -1.0
    assert engine.world.gravity.g[1] == pytest.approx(gy, abs=1e-6)


def test_type_a_collision_never_mutates_gravity():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(3.0)
    assert entries(engine, "/mr4mr/gravity") == []
    assert engine.world.gravity.g == (0.0, -9.8, 0.0)


def test_recording_collects_programs_and_grid_ticks():
    engine = make_engine()
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(8.0)
    rec = engine.finalize()
    cfg = engine.config
    assert rec.programs[int(ObjectKind.TYPE_A)] == cfg.collision_programs[0]
    assert rec.programs[cfg.loop_channel] == cfg.loop_program
    loop_notes = [n for n in rec.notes if n.channel == cfg.loop_channel]
    assert loop_notes
    for n in loop_notes:
        assert n.tick_on % STEP_TICKS == 0
        assert n.tick_off - n.tick_on in range(STEP_TICKS, 33 * STEP_TICKS)
    assert STEP_TICKS == DIVISION // 4


def test_listener_position_shapes_pan():
    engine = make_engine()
    engine.set_listener((0.5, 1.6, 2.5), (0.0, 0.0, 1.0))  # far left of the room
    engine.spawn("b", ObjectKind.TYPE_A, (3.5, 1.15, 2.5))  # drops to the right
    engine.run_seconds(1.0)
    note = next(
        e for e in entries(engine, "/mr4mr/note")
        if e.values[0] == int(ObjectKind.TYPE_A)
    )
    assert note.values[3] > 0.9  # hard right


def test_missing_corpus_degrades_to_fallback(tmp_path, caplog):
    import logging

    with caplog.at_level(logging.WARNING, logger="roomloop.engine"):
        engine = Engine(
            EngineConfig(corpus_file=str(tmp_path / "nope.txt")), geometry=BARE
        )
    assert engine.model is None
    assert "corpus" in caplog.text
    engine.spawn("b", ObjectKind.TYPE_A, (2.0, 1.15, 2.5))
    engine.run_seconds(8.0)
    assert engine.state.bases_created >= 1  # fallback continuation still loops


def test_run_seconds_tick_count():
    engine = make_engine()
    engine.run_seconds(0.5)
    assert engine.state.ticks == 60
    assert engine.now == pytest.approx(0.5)


def test_same_seed_same_log():
    logs = []
    for _ in range(2):
        engine = make_engine(seed=42)
        engine.spawn("c", ObjectKind.TYPE_C, (2.0, 1.15, 2.5))
        engine.spawn("b", ObjectKind.TYPE_B, (1.0, 2.0, 1.0))
        engine.apply_impulse("b", (1.5, 0.0, 2.0))
        engine.run_seconds(6.0)
        logs.append([(e.time, e.address, e.values) for e in engine.osc_log])
    assert logs[0] == logs[1]
