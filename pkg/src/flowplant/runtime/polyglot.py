"""Polyglot protocol: external (foreign-runtime) services join the data flow.

The host opens a loopback port and spawns the service process with
PLAT_SVC_PORT / PLAT_SVC_ID in its environment; the service connects and
performs a hello/helloAck handshake (protocolVersion 1). Frames are the
platform's length-prefixed JSON frames with fields type/id/payload; types:
hello, helloAck, data, result, error, ping, pong, shutdown.
"""

from __future__ import annotations

import os
import queue
import shlex
import socket
import subprocess
import threading
import uuid

from ..framing import Disconnected, recv_frame, send_frame

PROTOCOL_VERSION = 1
PORT_ENV = "PLAT_SVC_PORT"
SERVICE_ID_ENV = "PLAT_SVC_ID"

FRAME_TYPES = ("hello", "helloAck", "data", "result", "error", "ping", "pong", "shutdown")


class SpawnFailure(Exception):
    pass


class HandshakeVersionMismatch(Exception):
    pass


class ProtocolViolation(Exception):
    pass


class ServiceCallError(Exception):
    """The service answered a data frame with an error frame."""


class PolyglotHandle:
    """Host-side handle to one connected external service."""

    def __init__(self, service_id: str, command: str, env: dict | None = None, accept_timeout_s: float = 60.0):
        self.service_id = service_id
        self._listener = socket.create_server(("127.0.0.1", 0))
        port = self._listener.getsockname()[1]
        child_env = dict(os.environ)
        child_env.update(env or {})
        child_env[PORT_ENV] = str(port)
        child_env[SERVICE_ID_ENV] = service_id
        try:
            self.process = subprocess.Popen(shlex.split(command), env=child_env)
        except OSError as exc:
            self._listener.close()
            raise SpawnFailure(f"cannot launch {command!r}: {exc}") from exc
        self._sock: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._pending: dict[str, queue.Queue] = {}
        self._pending_lock = threading.Lock()
        self._closed = False
        self._accept_timeout_s = accept_timeout_s

    def handshake(self) -> None:
        """Blocks until the service connects and completes hello/helloAck."""
        self._listener.settimeout(self._accept_timeout_s)
        try:
            sock, _ = self._listener.accept()
        except socket.timeout as exc:
            self.kill()
            raise SpawnFailure(f"service {self.service_id!r} never connected") from exc
        finally:
            self._listener.close()
        sock.settimeout(self._accept_timeout_s)
        frame = recv_frame(sock)
        sock.settimeout(None)
        if frame.get("type") != "hello":
            send_frame(sock, {"type": "error", "id": frame.get("id"), "payload": {"code": "expected-hello"}})
            sock.close()
            self.kill()
            raise ProtocolViolation(f"first frame was {frame.get('type')!r}, expected hello")
        version = (frame.get("payload") or {}).get("protocolVersion")
        if version != PROTOCOL_VERSION:
            send_frame(sock, {"type": "error", "id": frame.get("id"), "payload": {"code": "bad-version"}})
            sock.close()
            self.kill()
            raise HandshakeVersionMismatch(f"service sent protocolVersion {version!r}")
        send_frame(sock, {"type": "helloAck", "id": frame.get("id"), "payload": {"protocolVersion": PROTOCOL_VERSION}})
        self._sock = sock
        threading.Thread(target=self._read_loop, daemon=True).start()

    def _read_loop(self):
        while not self._closed:
            try:
                frame = recv_frame(self._sock)
            except Exception:  # noqa: BLE001
                self._fail_pending(Disconnected("service connection lost"))
                return
            ftype = frame.get("type")
            if ftype in ("result", "error", "pong"):
                with self._pending_lock:
                    waiter = self._pending.pop(frame.get("id"), None)
                if waiter is not None:
                    waiter.put(frame)
                continue
            # Unknown frame type from the service: error frame, then close.
            try:
                with self._send_lock:
                    send_frame(self._sock, {"type": "error", "id": frame.get("id"), "payload": {"code": "unknown-type"}})
            except Exception:  # noqa: BLE001
                pass
            self._fail_pending(ProtocolViolation(f"service sent unknown frame type {ftype!r}"))
            self.close_connection()
            return

    def _fail_pending(self, exc: Exception):
        with self._pending_lock:
            pending = list(self._pending.values())
            self._pending.clear()
        for waiter in pending:
            waiter.put(exc)

    def _roundtrip(self, frame: dict, timeout_s: float):
        if self._sock is None:
            raise Disconnected("not connected")
        waiter: queue.Queue = queue.Queue()
        frame_id = frame.setdefault("id", uuid.uuid4().hex)
        with self._pending_lock:
            self._pending[frame_id] = waiter
        with self._send_lock:
            send_frame(self._sock, frame)
        try:
            reply = waiter.get(timeout=timeout_s)
        except queue.Empty as exc:
            with self._pending_lock:
                self._pending.pop(frame_id, None)
            raise TimeoutError(f"no reply to {frame['type']} within {timeout_s}s") from exc
        if isinstance(reply, Exception):
            raise reply
        return reply

    def request(self, payload, timeout_s: float = 30.0):
        """data -> result round trip; raises ServiceCallError on an error frame."""
        reply = self._roundtrip({"type": "data", "payload": payload}, timeout_s)
        if reply.get("type") == "error":
            raise ServiceCallError(str(reply.get("payload")))
        return reply.get("payload")

    def ping(self, timeout_s: float = 2.0) -> bool:
        reply = self._roundtrip({"type": "ping", "payload": None}, timeout_s)
        return reply.get("type") == "pong"

    def shutdown(self, timeout_s: float = 10.0) -> bool:
        """Send shutdown and wait for process exit; False if it ignored us."""
        if self._sock is not None:
            try:
                with self._send_lock:
                    send_frame(self._sock, {"type": "shutdown", "id": uuid.uuid4().hex, "payload": None})
            except Exception:  # noqa: BLE001
                pass
        try:
            self.process.wait(timeout=timeout_s)
            exited = True
        except subprocess.TimeoutExpired:
            exited = False
        if not exited:
            self.kill()
        self.close_connection()
        return exited

    def kill(self):
        if self.process.poll() is None:
            self.process.kill()
            try:
                self.process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                pass

    def close_connection(self):
        self._closed = True
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._sock.close()
            except OSError:
                pass


def spawn(service_id: str, command: str, env: dict | None = None, startup_timeout_s: float = 60.0) -> PolyglotHandle:
    handle = PolyglotHandle(service_id, command, env=env, accept_timeout_s=startup_timeout_s)
    handle.handshake()
    return handle


class PolyglotWorker:
    """Service-side helper: connect, handshake, serve data frames.

    handler(payload) -> payload; exceptions become error frames. Used by the
    stub services in the tests and by external AI services.
    """

    def __init__(self, handler, port: int | None = None, service_id: str | None = None,
                 protocol_version: int = PROTOCOL_VERSION):
        self.handler = handler
        self.port = port if port is not None else int(os.environ[PORT_ENV])
        self.service_id = service_id if service_id is not None else os.environ.get(SERVICE_ID_ENV, "svc")
        self.protocol_version = protocol_version

    def run(self) -> None:
        sock = socket.create_connection(("127.0.0.1", self.port))
        send_frame(
            sock,
            {
                "type": "hello",
                "id": uuid.uuid4().hex,
                "payload": {"protocolVersion": self.protocol_version, "serviceId": self.service_id},
            },
        )
        ack = recv_frame(sock)
        if ack.get("type") != "helloAck":
            sock.close()
            return
        while True:
            try:
                frame = recv_frame(sock)
            except Disconnected:
                return
            ftype = frame.get("type")
            if ftype == "shutdown":
                sock.close()
                return
            if ftype == "ping":
                send_frame(sock, {"type": "pong", "id": frame.get("id"), "payload": None})
            elif ftype == "data":
                try:
                    result = self.handler(frame.get("payload"))
                    send_frame(sock, {"type": "result", "id": frame.get("id"), "payload": result})
                except Exception as exc:  # noqa: BLE001
                    send_frame(
                        sock,
                        {"type": "error", "id": frame.get("id"), "payload": {"code": "handler-error", "message": str(exc)}},
                    )
            else:
                # host replies with an error frame and closes on us
                continue
