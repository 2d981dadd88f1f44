"""Scripted sessions: a text file of timed commands drives the engine.

Line format is `<time> <command> <args...>`, times in seconds from
session start, non-decreasing. Supported commands:

    spawn <id> <kind A|B|C> <x> <y> <z> [radius]
    impulse <id> <ix> <iy> <iz>
    grab <id> <x> <y> <z>
    release <id> [ix iy iz]
    color <r> <g> <b>
    listener <x> <y> <z> <fx> <fz>
    end

Blank lines and # comments are ignored. `end` is required and must be
last; it fixes the session length so runs are reproducible. Commands
apply at the start of the first tick at or after their time.
"""

from __future__ import annotations

from dataclasses import dataclass

from roomloop.config import EngineConfig
from roomloop.engine import Engine
from roomloop.midi import encode_smf
from roomloop.room import ObjectKind

_KINDS = {"A": ObjectKind.TYPE_A, "B": ObjectKind.TYPE_B, "C": ObjectKind.TYPE_C}

_ARG_COUNTS = {
    "spawn": (5, 6),
    "impulse": (4, 4),
    "grab": (4, 4),
    "release": (1, 4),
    "color": (3, 3),
    "listener": (5, 5),
    "end": (0, 0),
}


@dataclass(frozen=True)
class Command:
    time: float
    name: str
    args: tuple[str, ...]


def parse_scenario(path) -> list[Command]:
    commands: list[Command] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                time = float(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad time {parts[0]!r}") from None
            if time < 0:
                raise ValueError(f"{path}:{lineno}: negative time")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: missing command")
            name, args = parts[1], tuple(parts[2:])
            if name not in _ARG_COUNTS:
                raise ValueError(f"{path}:{lineno}: unknown command {name!r}")
            lo, hi = _ARG_COUNTS[name]
            ok = len(args) in (1, 4) if name == "release" else lo <= len(args) <= hi
            if not ok:
                raise ValueError(
                    f"{path}:{lineno}: {name} takes {lo}..{hi} args, got {len(args)}"
                )
            commands.append(Command(time, name, args))
    if not commands:
        raise ValueError(f"{path}: empty scenario")
    times = [c.time for c in commands]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError(f"{path}: command times must be non-decreasing")
    if commands[-1].name != "end":
        raise ValueError(f"{path}: scenario must finish with `end`")
    if any(c.name == "end" for c in commands[:-1]):
        raise ValueError(f"{path}: `end` must be the last command")
    return commands


def _apply(engine: Engine, cmd: Command) -> None:
    a = cmd.args
    if cmd.name == "spawn":
        kind = _KINDS.get(a[1].upper())
        if kind is None:
            raise ValueError(f"unknown object kind {a[1]!r}")
        radius = float(a[5]) if len(a) == 6 else 0.15
        engine.spawn(a[0], kind, (float(a[2]), float(a[3]), float(a[4])), radius=radius)
    elif cmd.name == "impulse":
        engine.apply_impulse(a[0], (float(a[1]), float(a[2]), float(a[3])))
    elif cmd.name == "grab":
        engine.grab_move(a[0], (float(a[1]), float(a[2]), float(a[3])))
    elif cmd.name == "release":
        impulse = (float(a[1]), float(a[2]), float(a[3])) if len(a) == 4 else (0.0, 0.0, 0.0)
        engine.release(a[0], impulse)
    elif cmd.name == "color":
        engine.on_scene_color((int(a[0]), int(a[1]), int(a[2])))
    elif cmd.name == "listener":
        engine.set_listener(
            (float(a[0]), float(a[1]), float(a[2])),
            (float(a[3]), 0.0, float(a[4])),
        )


def run_scenario(engine: Engine, commands: list[Command]) -> Engine:
    """Drive the engine tick by tick, applying commands as they come due."""
    end_time = commands[-1].time
    total_ticks = round(end_time * engine.config.tick_rate)
    pending = list(commands[:-1])
    idx = 0
    for _ in range(total_ticks):
        while idx < len(pending) and pending[idx].time <= engine.now + 1e-9:
            _apply(engine, pending[idx])
            idx += 1
        engine.tick()
    while idx < len(pending):  # commands at the end instant still apply
        _apply(engine, pending[idx])
        idx += 1
    return engine


def simulate(scenario_path, config: EngineConfig | None = None) -> tuple[Engine, bytes]:
    """Run a scenario headless on simulated time; return (engine, SMF bytes)."""
    commands = parse_scenario(scenario_path)
    engine = Engine(config)
    run_scenario(engine, commands)
    recording = engine.finalize()
    return engine, encode_smf(recording)
