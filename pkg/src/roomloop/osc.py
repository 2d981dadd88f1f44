"""OSC 1.0 message/bundle codec and address-pattern dispatch.

Implements the minimal OSC core the engine needs: messages with int32
('i'), float32 ('f'), string ('s'), and blob ('b') arguments, bundles
with 64-bit NTP timetags, and deterministic first-match dispatch with a
whole-segment '*' wildcard. Everything is big-endian and padded to
4-byte boundaries, so ``decode(encode(m)) == m`` holds bit-exactly
(float arguments travel as IEEE float32 and come back as that float32
value).

The decoder is total: arbitrary byte input either yields a message or
raises :class:`OscCodecError` carrying the byte offset of the problem.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

SUPPORTED_TAGS = frozenset("ifsb")

#: Bundle timetag meaning "execute immediately".
IMMEDIATELY = 1

_INT32_MIN = -(2**31)
_INT32_MAX = 2**31 - 1

ArgValue = Union[int, float, str, bytes]


class OscCodecError(ValueError):
    """Malformed OSC data. ``offset`` is the byte position, when known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class OscMessage:
    """An OSC message: '/'-rooted address plus ordered (tag, value) args."""

    address: str
    args: tuple[tuple[str, ArgValue], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple((t, v) for t, v in self.args))


@dataclass(frozen=True)
class OscBundle:
    """An OSC bundle: timetag plus messages or nested bundles."""

    timetag: int = IMMEDIATELY
    elements: tuple[Union["OscMessage", "OscBundle"], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True)
class Route:
    """Address pattern bound to a handler id.

    Patterns match exactly, except that a segment of exactly '*'
    matches any single address segment.
    """

    pattern: str
    handler: object


def _check_osc_string(s: str, what: str) -> bytes:
    try:
        raw = s.encode("ascii")
    except UnicodeEncodeError:
        raise OscCodecError(f"{what} is not ASCII: {s!r}")
    if b"\x00" in raw:
        raise OscCodecError(f"{what} contains NUL: {s!r}")
    for ch in raw:
        if not 0x20 <= ch <= 0x7E:
            raise OscCodecError(f"{what} contains non-printable byte 0x{ch:02x}")
    return raw


def _pad4(data: bytes) -> bytes:
    rem = len(data) % 4
    return data if rem == 0 else data + b"\x00" * (4 - rem)


def _encode_string(s: str, what: str) -> bytes:
    return _pad4(_check_osc_string(s, what) + b"\x00")


def encode_message(msg: OscMessage) -> bytes:
    """Encode a message to its padded big-endian wire form.

    The result length is always a multiple of 4. Raises
    :class:`OscCodecError` for unsupported tags or out-of-range values.
    """
    if not msg.address.startswith("/"):
        raise OscCodecError(f"address must start with '/': {msg.address!r}")
    parts = [_encode_string(msg.address, "address")]
    tags = ","
    payload = []
    for tag, value in msg.args:
        if tag == "i":
            if not isinstance(value, int) or isinstance(value, bool):
                raise OscCodecError(f"tag 'i' needs an int, got {value!r}")
            if not _INT32_MIN <= value <= _INT32_MAX:
                raise OscCodecError(f"int32 out of range: {value}")
            payload.append(struct.pack(">i", value))
        elif tag == "f":
            payload.append(struct.pack(">f", float(value)))
        elif tag == "s":
            if not isinstance(value, str):
                raise OscCodecError(f"tag 's' needs a str, got {value!r}")
            payload.append(_encode_string(value, "string arg"))
        elif tag == "b":
            if not isinstance(value, (bytes, bytearray)):
                raise OscCodecError(f"tag 'b' needs bytes, got {value!r}")
            payload.append(struct.pack(">i", len(value)) + _pad4(bytes(value)))
        else:
            raise OscCodecError(f"unsupported OSC type tag {tag!r}")
        tags += tag
    parts.append(_encode_string(tags, "type tags"))
    parts.extend(payload)
    return b"".join(parts)


def _read_string(data: bytes, offset: int, what: str) -> tuple[str, int]:
    end = data.find(b"\x00", offset)
    if end < 0:
        raise OscCodecError(f"unterminated {what}", offset)
    raw = data[offset:end]
    for i, ch in enumerate(raw):
        if not 0x20 <= ch <= 0x7E:
            raise OscCodecError(f"non-printable byte 0x{ch:02x} in {what}", offset + i)
    next_off = end + 1
    pad_end = offset + ((next_off - offset + 3) // 4) * 4
    if pad_end > len(data):
        raise OscCodecError(f"truncated padding after {what}", end)
    if data[next_off:pad_end] != b"\x00" * (pad_end - next_off):
        raise OscCodecError(f"bad padding after {what}", next_off)
    return raw.decode("ascii"), pad_end


def decode_message(data: bytes) -> OscMessage:
    """Decode one OSC message; inverse of :func:`encode_message`.

    Requires length >= 8 and 4-alignment, a ','-prefixed type tag
    string, and no trailing bytes.
    """
    if len(data) % 4 != 0:
        raise OscCodecError(f"buffer of length {len(data)} not 4-aligned", 0)
    if len(data) < 8:
        raise OscCodecError(f"message too short: {len(data)} bytes", 0)
    address, offset = _read_string(data, 0, "address")
    if not address.startswith("/"):
        raise OscCodecError(f"address must start with '/': {address!r}", 0)
    tag_off = offset
    tags, offset = _read_string(data, offset, "type tag string")
    if not tags.startswith(","):
        raise OscCodecError("type tag string missing ',' prefix", tag_off)
    args: list[tuple[str, ArgValue]] = []
    for tag in tags[1:]:
        if tag == "i":
            if offset + 4 > len(data):
                raise OscCodecError("truncated int32 argument", offset)
            args.append(("i", struct.unpack_from(">i", data, offset)[0]))
            offset += 4
        elif tag == "f":
            if offset + 4 > len(data):
                raise OscCodecError("truncated float32 argument", offset)
            args.append(("f", struct.unpack_from(">f", data, offset)[0]))
            offset += 4
        elif tag == "s":
            value, offset = _read_string(data, offset, "string argument")
            args.append(("s", value))
        elif tag == "b":
            if offset + 4 > len(data):
                raise OscCodecError("truncated blob size", offset)
            size = struct.unpack_from(">i", data, offset)[0]
            if size < 0:
                raise OscCodecError(f"negative blob size {size}", offset)
            offset += 4
            padded = ((size + 3) // 4) * 4
            if offset + padded > len(data):
                raise OscCodecError("truncated blob payload", offset)
            if data[offset + size:offset + padded] != b"\x00" * (padded - size):
                raise OscCodecError("bad padding after blob", offset + size)
            args.append(("b", data[offset:offset + size]))
            offset += padded
        else:
            raise OscCodecError(f"unsupported OSC type tag {tag!r}", tag_off)
    if offset != len(data):
        raise OscCodecError(f"{len(data) - offset} trailing bytes", offset)
    return OscMessage(address, tuple(args))


_BUNDLE_HEADER = b"#bundle\x00"


def encode_bundle(bundle: OscBundle) -> bytes:
    """Encode a bundle: '#bundle' header, 8-byte timetag, sized elements."""
    if not 0 <= bundle.timetag < 2**64:
        raise OscCodecError(f"timetag out of uint64 range: {bundle.timetag}")
    parts = [_BUNDLE_HEADER, struct.pack(">Q", bundle.timetag)]
    for element in bundle.elements:
        if isinstance(element, OscBundle):
            enc = encode_bundle(element)
        else:
            enc = encode_message(element)
        parts.append(struct.pack(">i", len(enc)))
        parts.append(enc)
    return b"".join(parts)


def decode_bundle(data: bytes) -> OscBundle:
    """Decode a bundle; inverse of :func:`encode_bundle`."""
    if len(data) % 4 != 0:
        raise OscCodecError(f"buffer of length {len(data)} not 4-aligned", 0)
    if len(data) < 16 or data[:8] != _BUNDLE_HEADER:
        raise OscCodecError("missing '#bundle' header", 0)
    timetag = struct.unpack_from(">Q", data, 8)[0]
    offset = 16
    elements: list[OscMessage | OscBundle] = []
    while offset < len(data):
        if offset + 4 > len(data):
            raise OscCodecError("truncated element size", offset)
        size = struct.unpack_from(">i", data, offset)[0]
        offset += 4
        if size < 0 or size % 4 != 0:
            raise OscCodecError(f"bad element size {size}", offset - 4)
        if offset + size > len(data):
            raise OscCodecError(f"element size {size} exceeds remaining buffer", offset - 4)
        elements.append(decode_packet(data[offset:offset + size]))
        offset += size
    return OscBundle(timetag, tuple(elements))


def decode_packet(data: bytes) -> OscMessage | OscBundle:
    """Decode a datagram as a message or a bundle, by its first bytes."""
    if data[:8] == _BUNDLE_HEADER:
        return decode_bundle(data)
    if data[:1] == b"/":
        return decode_message(data)
    raise OscCodecError("packet is neither a message nor a bundle", 0)


def _segments_match(pattern: str, address: str) -> bool:
    pseg = pattern.split("/")
    aseg = address.split("/")
    if len(pseg) != len(aseg):
        return False
    return all(p == "*" or p == a for p, a in zip(pseg, aseg))


def dispatch(msg: OscMessage, routes: list[Route] | tuple[Route, ...]):
    """Return the handler id of the first route matching the address.

    '*' matches exactly one address segment; otherwise segments must
    match exactly. Returns None when no route matches.
    """
    for route in routes:
        if _segments_match(route.pattern, msg.address):
            return route.handler
    return None
