"""Wire framing: 4-byte big-endian length prefix plus UTF-8 JSON."""

import socket
import struct
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowplant.framing import (
    HEADER_SIZE,
    MAX_FRAME_BYTES,
    Disconnected,
    FrameTooLarge,
    encode_frame,
    recv_frame,
    send_frame,
)

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-(2**53), 2**53) | st.text(max_size=30),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)


def test_header_layout():
    data = encode_frame({"a": 1})
    assert len(data) >= HEADER_SIZE
    (length,) = struct.unpack(">I", data[:HEADER_SIZE])
    assert length == len(data) - HEADER_SIZE


def test_too_large_rejected():
    with pytest.raises(FrameTooLarge):
        encode_frame({"blob": "x" * MAX_FRAME_BYTES})


def sock_pair():
    server = socket.create_server(("127.0.0.1", 0))
    port = server.getsockname()[1]
    result = {}

    def accept():
        conn, _ = server.accept()
        result["server"] = conn

    t = threading.Thread(target=accept)
    t.start()
    client = socket.create_connection(("127.0.0.1", port))
    t.join()
    server.close()
    return client, result["server"]


def test_send_recv_roundtrip():
    a, b = sock_pair()
    try:
        send_frame(a, {"type": "msg", "topic": "t", "payload": [1, 2, 3]})
        send_frame(a, {"second": True})
        assert recv_frame(b) == {"type": "msg", "topic": "t", "payload": [1, 2, 3]}
        assert recv_frame(b) == {"second": True}
    finally:
        a.close()
        b.close()


def test_disconnect_detected():
    a, b = sock_pair()
    a.close()
    with pytest.raises(Disconnected):
        recv_frame(b)
    b.close()


def test_oversized_length_prefix_rejected():
    a, b = sock_pair()
    try:
        a.sendall(struct.pack(">I", MAX_FRAME_BYTES + 1))
        with pytest.raises(FrameTooLarge):
            recv_frame(b)
    finally:
        a.close()
        b.close()


@settings(max_examples=100, deadline=None)
@given(json_values)
def test_encode_is_parseable(value):
    import json

    doc = {"payload": value}
    data = encode_frame(doc)
    assert json.loads(data[HEADER_SIZE:].decode("utf-8")) == doc
