"""HTTP + WebSocket service around one live engine session.

The conductor loop stays single-writer: EngineRuntime serializes every
mutation (ticks included) behind one lock, so HTTP handlers, WebSocket
receivers, and the pacing thread never touch SessionState concurrently.
The WebSocket bridge mirrors the OSC log one message per JSON frame and
interleaves server-authoritative state snapshots; browsers get no UDP,
so this is their whole view of the session.

Live pacing runs ticks on a background thread at tick_rate against the
wall clock. Manual mode (the default for tests and the in-process CLI
client) only advances time through POST /api/step.
"""

from __future__ import annotations

import asyncio
import base64
import contextlib
import dataclasses
import io
import logging
import tempfile
import threading
import time as time_mod
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from roomloop import __version__
from roomloop.color import rgb_to_keyscale
from roomloop.config import EngineConfig
from roomloop.engine import Engine, LogEntry
from roomloop.room import ObjectKind
from roomloop.scenario import parse_scenario, run_scenario
from roomloop.midi import encode_smf

log = logging.getLogger(__name__)

MAX_IMAGE_BYTES = 2 * 1024 * 1024
_KINDS = {"A": ObjectKind.TYPE_A, "B": ObjectKind.TYPE_B, "C": ObjectKind.TYPE_C}


# -- wire models -----------------------------------------------------


class KeyInfo(BaseModel):
    tonic: int
    mode: str
    name: str


class ObjectState(BaseModel):
    id: str
    kind: int
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    radius: float
    held: bool


class StateResponse(BaseModel):
    time: float
    ticks: int
    key: KeyInfo
    gravity: tuple[float, float, float]
    objects: list[ObjectState]
    bases_created: int
    mode: Literal["live", "manual"]


class RoomResponse(BaseModel):
    size: tuple[float, float, float]
    furniture: list[dict]


class ColorRequest(BaseModel):
    r: int = Field(ge=0, le=255)
    g: int = Field(ge=0, le=255)
    b: int = Field(ge=0, le=255)


class ColorResponse(BaseModel):
    key: KeyInfo
    box: str
    changed: bool


class InteractionRequest(BaseModel):
    kind: Literal[
        "spawn", "impulse", "throw", "grab", "move", "release", "listener"
    ]
    id: str | None = None
    object_kind: Literal["A", "B", "C"] | None = None
    position: tuple[float, float, float] | None = None
    vector: tuple[float, float, float] | None = None
    forward: tuple[float, float, float] | None = None
    radius: float = 0.15


class InteractionResponse(BaseModel):
    ok: bool = True
    clamped: bool | None = None


class StepRequest(BaseModel):
    ticks: int = Field(default=1, ge=1, le=120_000)


class LogEntryModel(BaseModel):
    time: float
    address: str
    args: list[int | float | str]

    @classmethod
    def from_entry(cls, entry: LogEntry) -> "LogEntryModel":
        return cls(time=entry.time, address=entry.address, args=list(entry.values))


class StepResponse(BaseModel):
    time: float
    entries: list[LogEntryModel]


class SimulateRequest(BaseModel):
    scenario: str | None = None        # inline scenario text
    scenario_path: str | None = None   # or a file on the server
    seed: int | None = None


class SimulateResponse(BaseModel):
    midi_b64: str
    osc_log: list[LogEntryModel]
    duration: float
    bases_created: int


class SceneImageResponse(BaseModel):
    dominant: tuple[int, int, int]
    key: KeyInfo
    changed: bool


def _key_info(key) -> KeyInfo:
    return KeyInfo(tonic=key.tonic, mode=key.mode.value, name=key.name)


# -- the session holder ----------------------------------------------


class EngineRuntime:
    """One engine session behind a lock, optionally paced by a thread."""

    def __init__(self, config: EngineConfig | None = None, live: bool = False):
        self.config = config or EngineConfig()
        self.engine = Engine(self.config)
        self.live = live
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._last_capture: float | None = None

    # -- pacing ------------------------------------------------------

    def start(self) -> None:
        if not self.live or self._thread is not None:
            return
        self._thread = threading.Thread(target=self._pace, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _pace(self) -> None:
        dt = self.engine.dt
        next_due = time_mod.monotonic()
        while not self._stop.is_set():
            with self._lock:
                self.engine.tick()
            next_due += dt
            delay = next_due - time_mod.monotonic()
            if delay > 0:
                self._stop.wait(delay)
            else:
                next_due = time_mod.monotonic()  # fell behind; drop the debt

    # -- queries -----------------------------------------------------

    def state(self) -> StateResponse:
        with self._lock:
            e = self.engine
            return StateResponse(
                time=e.now,
                ticks=e.state.ticks,
                key=_key_info(e.state.key),
                gravity=tuple(e.world.gravity.g),
                objects=[
                    ObjectState(
                        id=o.id,
                        kind=int(o.kind),
                        position=tuple(o.position),
                        velocity=tuple(o.velocity),
                        radius=o.radius,
                        held=o.held,
                    )
                    for o in e.world.objects.values()
                ],
                bases_created=e.state.bases_created,
                mode="live" if self.live else "manual",
            )

    def room(self) -> RoomResponse:
        geo = self.engine.world.geometry
        return RoomResponse(
            size=tuple(geo.size),
            furniture=[
                {"label": f.label, "lo": tuple(f.box.lo), "hi": tuple(f.box.hi)}
                for f in geo.furniture
            ],
        )

    def log_since(self, cursor: int) -> tuple[int, list[LogEntry]]:
        with self._lock:
            log = self.engine.osc_log
            return len(log), log[cursor:]

    # -- mutations ---------------------------------------------------

    def step(self, ticks: int) -> StepResponse:
        if self.live:
            raise HTTPException(409, "session is live; it ticks on its own")
        entries: list[LogEntry] = []
        with self._lock:
            for _ in range(ticks):
                entries.extend(self.engine.tick())
            now = self.engine.now
        return StepResponse(
            time=now, entries=[LogEntryModel.from_entry(e) for e in entries]
        )

    def color(self, rgb: tuple[int, int, int]) -> ColorResponse:
        with self._lock:
            before = self.engine.state.key
            key = self.engine.on_scene_color(rgb)
        _, box = rgb_to_keyscale(rgb)
        return ColorResponse(key=_key_info(key), box=box, changed=key != before)

    def scene_image(self, pixels: np.ndarray) -> SceneImageResponse:
        from roomloop.color import dominant_color

        if self.live:
            now = time_mod.monotonic()
            if (
                self._last_capture is not None
                and now - self._last_capture < self.config.capture_period
            ):
                raise HTTPException(429, "scene capture rate limit")
            self._last_capture = now
        rgb = dominant_color(
            pixels, k=self.config.kmeans_k, seed=self.engine.kmeans_seed
        )
        with self._lock:
            before = self.engine.state.key
            key = self.engine.on_scene_color(rgb)
        return SceneImageResponse(
            dominant=rgb, key=_key_info(key), changed=key != before
        )

    def interact(self, req: InteractionRequest) -> InteractionResponse:
        with self._lock:
            return self._interact_locked(req)

    def _interact_locked(self, req: InteractionRequest) -> InteractionResponse:
        e = self.engine
        kind = req.kind
        try:
            if kind == "spawn":
                if not (req.id and req.object_kind and req.position):
                    raise ValueError("spawn needs id, object_kind, position")
                e.spawn(req.id, _KINDS[req.object_kind], req.position, radius=req.radius)
            elif kind in ("impulse", "throw"):
                if not (req.id and req.vector):
                    raise ValueError(f"{kind} needs id and vector")
                e.apply_impulse(req.id, req.vector)
            elif kind in ("grab", "move"):
                if not (req.id and req.position):
                    raise ValueError(f"{kind} needs id and position")
                clamped = e.grab_move(req.id, req.position)
                return InteractionResponse(clamped=clamped)
            elif kind == "release":
                if not req.id:
                    raise ValueError("release needs id")
                e.release(req.id, req.vector or (0.0, 0.0, 0.0))
            elif kind == "listener":
                if not (req.position and req.forward):
                    raise ValueError("listener needs position and forward")
                e.set_listener(req.position, req.forward)
        except KeyError as exc:
            raise HTTPException(404, f"no such object: {exc}") from exc
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return InteractionResponse()


# -- app factory -----------------------------------------------------


def default_ui_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(
    runtime: EngineRuntime | None = None, ui_dir: Path | str | None = None
) -> FastAPI:
    runtime = runtime or EngineRuntime()

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        runtime.start()
        yield
        runtime.stop()

    app = FastAPI(title="roomloop", version=__version__, lifespan=lifespan)
    app.state.runtime = runtime

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "time": runtime.engine.now}

    @app.get("/api/state", response_model=StateResponse)
    def state() -> StateResponse:
        return runtime.state()

    @app.get("/api/room", response_model=RoomResponse)
    def room() -> RoomResponse:
        return runtime.room()

    @app.post("/api/color", response_model=ColorResponse)
    def color(req: ColorRequest) -> ColorResponse:
        return runtime.color((req.r, req.g, req.b))

    @app.post("/api/interaction", response_model=InteractionResponse)
    def interaction(req: InteractionRequest) -> InteractionResponse:
        return runtime.interact(req)

    @app.post("/api/step", response_model=StepResponse)
    def step(req: StepRequest) -> StepResponse:
        return runtime.step(req.ticks)

    @app.post("/api/scene-image", response_model=SceneImageResponse)
    async def scene_image(request: Request) -> SceneImageResponse:
        body = await request.body()
        if len(body) > MAX_IMAGE_BYTES:
            raise HTTPException(413, "image larger than 2 MB")
        if not body:
            raise HTTPException(422, "empty image body")
        try:
            from PIL import Image

            with Image.open(io.BytesIO(body)) as img:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            raise HTTPException(422, f"undecodable image: {exc}") from exc
        return runtime.scene_image(pixels)

    @app.post("/api/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        if bool(req.scenario) == bool(req.scenario_path):
            raise HTTPException(422, "provide exactly one of scenario, scenario_path")
        config = runtime.config
        if req.seed is not None:
            config = dataclasses.replace(config, seed=req.seed)
        if req.scenario_path:
            path = req.scenario_path
            commands = _parse_or_422(path)
        else:
            with tempfile.NamedTemporaryFile(
                "w", suffix=".txt", delete=False
            ) as fh:
                fh.write(req.scenario)
                path = fh.name
            try:
                commands = _parse_or_422(path)
            finally:
                Path(path).unlink(missing_ok=True)
        engine = Engine(config)
        run_scenario(engine, commands)
        midi = encode_smf(engine.finalize())
        return SimulateResponse(
            midi_b64=base64.b64encode(midi).decode("ascii"),
            osc_log=[LogEntryModel.from_entry(e) for e in engine.osc_log],
            duration=engine.now,
            bases_created=engine.state.bases_created,
        )

    @app.websocket("/ws")
    async def ws(socket: WebSocket) -> None:
        await socket.accept()
        cursor = 0  # replay the session so late joiners see the whole log
        await socket.send_json(
            {
                "type": "hello",
                "room": runtime.room().model_dump(),
                "state": runtime.state().model_dump(),
            }
        )

        async def push() -> None:
            nonlocal cursor
            with contextlib.suppress(Exception):  # socket gone; receiver exits too
                while True:
                    cursor = await _flush(socket, runtime, cursor)
                    await asyncio.sleep(0.05)

        pusher = asyncio.create_task(push())
        try:
            while True:
                payload = await socket.receive_json()
                await _handle_ws_message(socket, runtime, payload)
        except WebSocketDisconnect:
            pass
        finally:
            pusher.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await pusher

    ui = Path(ui_dir) if ui_dir else default_ui_dir()
    if ui is not None and Path(ui).is_dir():
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app


def _parse_or_422(path):
    try:
        return parse_scenario(path)
    except (OSError, ValueError) as exc:
        raise HTTPException(422, f"bad scenario: {exc}") from exc


async def _flush(socket: WebSocket, runtime: EngineRuntime, cursor: int) -> int:
    new_cursor, entries = runtime.log_since(cursor)
    for entry in entries:
        await socket.send_json(LogEntryModel.from_entry(entry).model_dump())
    if entries:
        await socket.send_json(
            {"type": "state", **runtime.state().model_dump()}
        )
    return new_cursor


# -- UDP side of a live session --------------------------------------


class OscBridge:
    """Puts a live session on the wire.

    Follows the engine log and emits every entry as a real OSC datagram
    to emit_port, and drains inbound datagrams from listen_port between
    polls. Inbound /mr4mr/scene/color messages act like a camera frame's
    dominant color; everything else is logged and dropped, since the
    remaining addresses flow outward.
    """

    def __init__(self, runtime: EngineRuntime, host: str = "127.0.0.1"):
        from roomloop.transport import OscReceiver, OscSender

        self.runtime = runtime
        self.sender = OscSender(host, runtime.config.emit_port)
        self.receiver = OscReceiver(runtime.config.listen_port, host)
        self._cursor = 0
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            self.pump()
            self._stop.wait(0.02)

    def pump(self) -> int:
        """One poll: forward new log entries, apply inbound messages."""
        self._cursor, entries = self.runtime.log_since(self._cursor)
        for entry in entries:
            self.sender.send(entry.message)
        for msg in self.receiver.drain():
            self._apply(msg)
        return len(entries)

    def _apply(self, msg) -> None:
        if msg.address == "/mr4mr/scene/color":
            values = [v for _, v in msg.args]
            if len(values) == 3 and all(isinstance(v, int) for v in values):
                try:
                    self.runtime.color(tuple(values))
                except ValueError as exc:
                    log.warning("rejected inbound scene color: %s", exc)
                return
        log.info("ignoring inbound %s", msg.address)

    def close(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
        self.receiver.close()
        self.sender.close()


async def _handle_ws_message(
    socket: WebSocket, runtime: EngineRuntime, payload
) -> None:
    if not isinstance(payload, dict):
        await socket.send_json({"type": "error", "detail": "expected a JSON object"})
        return
    msg_type = payload.get("type")
    try:
        if msg_type == "interaction":
            req = InteractionRequest(**{k: v for k, v in payload.items() if k != "type"})
            result = runtime.interact(req)
            await socket.send_json({"type": "ack", **result.model_dump()})
        elif msg_type == "color":
            req = ColorRequest(**{k: v for k, v in payload.items() if k != "type"})
            result = runtime.color((req.r, req.g, req.b))
            await socket.send_json({"type": "ack", **result.model_dump()})
        elif msg_type == "step" and not runtime.live:
            runtime.step(int(payload.get("ticks", 1)))
            await socket.send_json({"type": "ack"})
        else:
            await socket.send_json(
                {"type": "error", "detail": f"unknown message type {msg_type!r}"}
            )
    except HTTPException as exc:
        await socket.send_json({"type": "error", "detail": exc.detail})
    except Exception as exc:
        await socket.send_json({"type": "error", "detail": str(exc)})
