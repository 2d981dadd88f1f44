"""Command line front end.

Four subcommands: serve (live session with HTTP, WebSocket, and UDP
OSC), simulate (headless scenario to a MIDI file), color (classify an
image's dominant color into a key), osc-monitor (print decoded OSC
traffic). simulate goes through the HTTP service contract even when
it runs in-process, so the CLI exercises the same surface a remote
client would; --server points it at a running instance instead.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path

from roomloop import __version__
from roomloop.config import EngineConfig, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roomloop",
        description="Ambient music engine driven by a simulated room.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run a live session")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000, help="HTTP port")
    serve.add_argument("--config", help="engine config file")
    serve.add_argument("--seed", type=int, help="override the session seed")
    serve.add_argument(
        "--no-osc", action="store_true", help="skip the UDP OSC bridge"
    )
    serve.add_argument("--ui-dir", help="static UI directory to mount at /ui")

    sim = sub.add_parser("simulate", help="run a scenario file headless")
    sim.add_argument("--scenario", required=True, help="scenario file")
    sim.add_argument("--out", required=True, help="MIDI output path")
    sim.add_argument("--config", help="engine config file")
    sim.add_argument("--seed", type=int, help="override the session seed")
    sim.add_argument("--log", help="also write the OSC log as JSON lines")
    sim.add_argument("--server", help="use a running service instead of in-process")

    color = sub.add_parser("color", help="map an image to a key")
    color.add_argument("--image", required=True, help="PPM or PNG image file")

    monitor = sub.add_parser("osc-monitor", help="print decoded OSC traffic")
    monitor.add_argument("--port", type=int, default=None, help="UDP port to watch")
    monitor.add_argument("--host", default="127.0.0.1")
    monitor.add_argument("--config", help="engine config file")
    monitor.add_argument(
        "--count", type=int, default=0, help="exit after N messages (0 = run forever)"
    )
    monitor.add_argument(
        "--timeout", type=float, default=None, help="exit after this many idle seconds"
    )
    return parser


def _load_config(args) -> EngineConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "config", None):
        return load_config(args.config, **overrides)
    return EngineConfig(**overrides)


def _cmd_serve(args) -> int:
    import uvicorn

    from roomloop.service import EngineRuntime, OscBridge, create_app

    config = _load_config(args)
    runtime = EngineRuntime(config, live=True)
    app = create_app(runtime, ui_dir=args.ui_dir)
    bridge = None
    if not args.no_osc:
        bridge = OscBridge(runtime)
        bridge.start()
        print(
            f"OSC: listening on udp/{config.listen_port}, "
            f"emitting to udp/{config.emit_port}",
            file=sys.stderr,
        )
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        if bridge is not None:
            bridge.close()
        runtime.stop()
    return 0


def _cmd_simulate(args) -> int:
    try:
        scenario_text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 1
    payload = {"scenario": scenario_text}
    if args.seed is not None:
        payload["seed"] = args.seed

    if args.server:
        import httpx

        response = httpx.post(
            args.server.rstrip("/") + "/api/simulate", json=payload, timeout=300.0
        )
    else:
        from fastapi.testclient import TestClient

        from roomloop.service import EngineRuntime, create_app

        app = create_app(EngineRuntime(_load_config(args)))
        with TestClient(app) as client:
            response = client.post("/api/simulate", json=payload)
    if response.status_code != 200:
        print(f"error: simulate failed: {response.text}", file=sys.stderr)
        return 1
    body = response.json()
    Path(args.out).write_bytes(base64.b64decode(body["midi_b64"]))
    if args.log:
        lines = [json.dumps(entry) for entry in body["osc_log"]]
        Path(args.log).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(
        f"wrote {args.out}: {body['duration']:.2f}s, "
        f"{body['bases_created']} melody base(s), "
        f"{len(body['osc_log'])} OSC messages"
    )
    return 0


def _cmd_color(args) -> int:
    from roomloop.color import dominant_color_of_file, rgb_to_keyscale

    try:
        rgb = dominant_color_of_file(args.image)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    key, box = rgb_to_keyscale(rgb)
    print(key.name)
    print(f"dominant rgb{rgb} -> {box}", file=sys.stderr)
    return 0


def _cmd_monitor(args) -> int:
    import time

    from roomloop.transport import OscReceiver

    port = args.port
    if port is None:
        port = _load_config(args).emit_port
    seen = 0
    deadline = time.monotonic() + args.timeout if args.timeout else None
    with OscReceiver(port, args.host) as receiver:
        print(f"listening on udp/{receiver.port}", file=sys.stderr)
        try:
            while True:
                msg = receiver.poll(timeout=0.2)
                if msg is None:
                    if deadline is not None and time.monotonic() > deadline:
                        return 0
                    continue
                rendered = " ".join(f"{tag}:{value}" for tag, value in msg.args)
                print(f"{msg.address} {rendered}".rstrip())
                seen += 1
                if args.count and seen >= args.count:
                    return 0
        except KeyboardInterrupt:
            return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "simulate": _cmd_simulate,
        "color": _cmd_color,
        "osc-monitor": _cmd_monitor,
    }
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
