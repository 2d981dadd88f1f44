"""UDP transport for OSC packets.

One sender, one threaded receiver. The receiver decodes datagrams on
its own thread and hands finished messages to an ordered queue; the
consumer (normally the conductor loop) drains it between ticks, so no
handler ever runs concurrently with another. Bundles are flattened on
arrival in element order (timetags are not scheduled).
"""

from __future__ import annotations

import logging
import queue
import socket
import threading

from roomloop.osc import (
    OscBundle,
    OscCodecError,
    OscMessage,
    decode_packet,
    encode_bundle,
    encode_message,
)

log = logging.getLogger(__name__)

#: Largest UDP payload we will send (IPv4 max datagram minus headers).
MAX_DATAGRAM = 65507


class OscSender:
    """Fire-and-forget OSC sender over a UDP socket."""

    def __init__(self, host: str = "127.0.0.1", port: int = 9001):
        self.target = (host, port)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, packet: OscMessage | OscBundle) -> None:
        if isinstance(packet, OscBundle):
            data = encode_bundle(packet)
        else:
            data = encode_message(packet)
        if len(data) > MAX_DATAGRAM:
            raise OscCodecError(
                f"encoded packet is {len(data)} bytes, exceeds single-datagram "
                f"limit {MAX_DATAGRAM}"
            )
        self._sock.sendto(data, self.target)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class OscReceiver:
    """Threaded UDP listener feeding decoded messages into a queue.

    Undecodable datagrams are counted and logged, never fatal.
    """

    def __init__(self, port: int = 9000, host: str = "127.0.0.1"):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self.port = self._sock.getsockname()[1]
        self.messages: queue.Queue[OscMessage] = queue.Queue()
        self.decode_errors = 0
        self._closed = False
        self._thread = threading.Thread(target=self._run, daemon=True, name="osc-recv")
        self._thread.start()

    def _run(self) -> None:
        while True:
            try:
                data, _addr = self._sock.recvfrom(65536)
            except OSError:
                return  # socket closed
            if self._closed:
                return
            try:
                packet = decode_packet(data)
            except OscCodecError as exc:
                self.decode_errors += 1
                log.warning("dropped undecodable datagram: %s", exc)
                continue
            for msg in _flatten(packet):
                self.messages.put(msg)

    def poll(self, timeout: float | None = 0.0) -> OscMessage | None:
        """Next decoded message, or None if none arrives within timeout."""
        try:
            if timeout is None:
                return self.messages.get()
            return self.messages.get(timeout=timeout) if timeout > 0 else self.messages.get_nowait()
        except queue.Empty:
            return None

    def drain(self) -> list[OscMessage]:
        """All messages currently queued, in arrival order."""
        out = []
        while True:
            try:
                out.append(self.messages.get_nowait())
            except queue.Empty:
                return out

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:  # wake the blocked recvfrom so join returns immediately
            wake = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            wake.sendto(b"", ("127.0.0.1", self.port))
            wake.close()
        except OSError:
            pass
        self._thread.join(timeout=2.0)
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _flatten(packet: OscMessage | OscBundle):
    if isinstance(packet, OscMessage):
        yield packet
        return
    for element in packet.elements:
        yield from _flatten(element)
