"""Polyglot protocol: spawn, handshake, request cycle, failure handling."""

import sys
import textwrap

import pytest

from flowplant.runtime.polyglot import (
    HandshakeVersionMismatch,
    PolyglotHandle,
    ProtocolViolation,
    ServiceCallError,
    SpawnFailure,
    spawn,
)


def write_service(tmp_path, body, name="svc.py"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return f"{sys.executable} {path}"


ECHO_SERVICE = """
    from flowplant.runtime.polyglot import PolyglotWorker

    def handle(payload):
        if payload == "boom":
            raise ValueError("requested failure")
        return {"echo": payload}

    PolyglotWorker(handle).run()
"""


@pytest.fixture
def echo(tmp_path):
    handle = spawn("echo", write_service(tmp_path, ECHO_SERVICE), startup_timeout_s=30)
    yield handle
    handle.shutdown(timeout_s=5)


class TestHappyPath:
    def test_request_response(self, echo):
        assert echo.request({"x": 1}) == {"echo": {"x": 1}}

    def test_multiple_requests_correlate(self, echo):
        for i in range(10):
            assert echo.request(i) == {"echo": i}

    def test_ping(self, echo):
        assert echo.ping() is True

    def test_handler_error_becomes_service_call_error(self, echo):
        with pytest.raises(ServiceCallError, match="requested failure"):
            echo.request("boom")
        assert echo.request("after") == {"echo": "after"}  # connection survives

    def test_shutdown_is_honored(self, tmp_path):
        handle = spawn("echo2", write_service(tmp_path, ECHO_SERVICE), startup_timeout_s=30)
        assert handle.shutdown(timeout_s=10) is True
        assert handle.process.poll() is not None


class TestHandshake:
    def test_version_mismatch_rejected(self, tmp_path):
        command = write_service(
            tmp_path,
            """
            from flowplant.runtime.polyglot import PolyglotWorker
            PolyglotWorker(lambda p: p, protocol_version=2).run()
            """,
        )
        with pytest.raises(HandshakeVersionMismatch):
            spawn("badver", command, startup_timeout_s=30)

    def test_first_frame_must_be_hello(self, tmp_path):
        command = write_service(
            tmp_path,
            """
            import os, socket
            from flowplant.framing import send_frame, recv_frame
            sock = socket.create_connection(("127.0.0.1", int(os.environ["PLAT_SVC_PORT"])))
            send_frame(sock, {"type": "data", "id": "1", "payload": None})
            reply = recv_frame(sock)
            raise SystemExit(0 if reply["payload"]["code"] == "expected-hello" else 1)
            """,
        )
        with pytest.raises(ProtocolViolation):
            spawn("nohello", command, startup_timeout_s=30)

    def test_never_connecting_service_times_out(self, tmp_path):
        command = write_service(tmp_path, "import time\ntime.sleep(60)\n")
        with pytest.raises(SpawnFailure):
            spawn("sleeper", command, startup_timeout_s=1)

    def test_unlaunchable_command(self):
        with pytest.raises(SpawnFailure):
            PolyglotHandle("ghost", "/definitely/not/a/binary")


class TestProtocolViolations:
    def test_unknown_frame_type_from_service(self, tmp_path):
        command = write_service(
            tmp_path,
            """
            import os, socket, uuid
            from flowplant.framing import send_frame, recv_frame
            sock = socket.create_connection(("127.0.0.1", int(os.environ["PLAT_SVC_PORT"])))
            send_frame(sock, {"type": "hello", "id": "1",
                              "payload": {"protocolVersion": 1, "serviceId": "x"}})
            recv_frame(sock)
            send_frame(sock, {"type": "gossip", "id": "2", "payload": None})
            recv_frame(sock)  # host's error frame
            """,
        )
        handle = spawn("weird", command, startup_timeout_s=30)
        try:
            with pytest.raises((ProtocolViolation, Exception)):
                handle.request({"x": 1}, timeout_s=5)
        finally:
            handle.shutdown(timeout_s=5)

    def test_dead_service_fails_pending(self, tmp_path):
        command = write_service(
            tmp_path,
            """
            import os, socket
            from flowplant.framing import send_frame, recv_frame
            sock = socket.create_connection(("127.0.0.1", int(os.environ["PLAT_SVC_PORT"])))
            send_frame(sock, {"type": "hello", "id": "1",
                              "payload": {"protocolVersion": 1, "serviceId": "x"}})
            recv_frame(sock)
            recv_frame(sock)  # wait for first data frame
            raise SystemExit(1)  # die without answering
            """,
        )
        handle = spawn("mortal", command, startup_timeout_s=30)
        try:
            with pytest.raises(Exception):
                handle.request({"x": 1}, timeout_s=5)
        finally:
            handle.shutdown(timeout_s=5)
