"""Length-prefixed JSON framing shared by the broker, machine protocol and polyglot services.

Wire format: 4-byte big-endian payload length followed by that many bytes of
UTF-8 JSON. Frames above MAX_FRAME_BYTES are rejected on both ends.
"""

import json
import socket
import struct

HEADER_SIZE = 4
MAX_FRAME_BYTES = 16 * 1024 * 1024  # 16 MiB


class FrameTooLarge(Exception):
    pass


class Disconnected(Exception):
    pass


def encode_frame(obj) -> bytes:
    body = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    return struct.pack(">I", len(body)) + body


def send_frame(sock: socket.socket, obj) -> None:
    try:
        sock.sendall(encode_frame(obj))
    except OSError as exc:
        raise Disconnected(str(exc)) from exc


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        try:
            chunk = sock.recv(remaining)
        except OSError as exc:
            raise Disconnected(str(exc)) from exc
        if not chunk:
            raise Disconnected("peer closed connection")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket):
    """Read one frame; raises Disconnected on EOF, FrameTooLarge on oversize."""
    header = _recv_exact(sock, HEADER_SIZE)
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"announced frame of {length} bytes exceeds {MAX_FRAME_BYTES}")
    body = _recv_exact(sock, length)
    return json.loads(body.decode("utf-8"))
