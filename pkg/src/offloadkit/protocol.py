"""Framed wire protocol between the offloading proxy and the remote manager.

Frame layout, big-endian::

    magic "P2CL" | version u8 | kind u8 | application_id u8 | payload_length u64 | payload

Kinds: 1 = request, 2 = response, 3 = error (payload carries the reason text).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO

from .errors import FrameError, TruncatedFrameError

MAGIC = b"P2CL"
VERSION = 1

KIND_REQUEST = 1
KIND_RESPONSE = 2
KIND_ERROR = 3
_KINDS = (KIND_REQUEST, KIND_RESPONSE, KIND_ERROR)

_HEADER = struct.Struct(">4sBBBQ")
HEADER_SIZE = _HEADER.size

DEFAULT_MAX_PAYLOAD = 256 * 1024 * 1024


@dataclass(frozen=True)
class Frame:
    kind: int
    application_id: int
    payload: bytes = field(default=b"")

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be 1, 2 or 3, got {self.kind!r}")
        if not 0 <= self.application_id <= 255:
            raise ValueError(f"application_id must fit a byte, got {self.application_id!r}")
        if not isinstance(self.payload, (bytes, bytearray)):
            raise ValueError("payload must be bytes")


def encode_frame(frame: Frame) -> bytes:
    header = _HEADER.pack(
        MAGIC, VERSION, frame.kind, frame.application_id, len(frame.payload)
    )
    return header + bytes(frame.payload)


def _parse_header(header: bytes, max_payload: int) -> tuple[int, int, int]:
    magic, version, kind, application_id, length = _HEADER.unpack(header)
    if magic != MAGIC:
        raise FrameError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FrameError(f"unsupported version {version}")
    if kind not in _KINDS:
        raise FrameError(f"unknown frame kind {kind}")
    if length > max_payload:
        raise FrameError(f"declared payload of {length} bytes exceeds limit {max_payload}")
    return kind, application_id, length


def decode_frame(
    data: bytes, *, max_payload: int = DEFAULT_MAX_PAYLOAD
) -> tuple[Frame, int]:
    """Decode one frame from the head of ``data``; returns (frame, bytes consumed).

    Raises TruncatedFrameError when more bytes are needed and FrameError on
    any malformation; never anything else, whatever the input.
    """
    if len(data) < HEADER_SIZE:
        raise TruncatedFrameError(
            f"need {HEADER_SIZE} header bytes, have {len(data)}"
        )
    kind, application_id, length = _parse_header(data[:HEADER_SIZE], max_payload)
    end = HEADER_SIZE + length
    if len(data) < end:
        raise TruncatedFrameError(f"need {end} bytes for frame, have {len(data)}")
    return Frame(kind=kind, application_id=application_id, payload=bytes(data[HEADER_SIZE:end])), end


def _read_exact(stream: BinaryIO, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining > 0:
        piece = stream.read(remaining)
        if not piece:
            raise TruncatedFrameError(
                f"stream closed with {remaining} of {count} bytes unread"
            )
        chunks.append(piece)
        remaining -= len(piece)
    return b"".join(chunks)


def read_frame(
    stream: BinaryIO, *, max_payload: int = DEFAULT_MAX_PAYLOAD
) -> Frame | None:
    """Read one frame from a blocking stream; None on clean end-of-stream."""
    first = stream.read(1)
    if not first:
        return None
    header = first + _read_exact(stream, HEADER_SIZE - 1)
    kind, application_id, length = _parse_header(header, max_payload)
    payload = _read_exact(stream, length) if length else b""
    return Frame(kind=kind, application_id=application_id, payload=payload)


def write_frame(stream: BinaryIO, frame: Frame) -> None:
    stream.write(encode_frame(frame))
    stream.flush()
