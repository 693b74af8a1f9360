"""TCP broker backend: length-prefixed JSON frames over loopback or LAN.

Frame types: {"type": "sub"|"pub", "topic": ..., "payload": ...} from clients,
{"type": "msg", ...} to subscribers, {"type": "err", "payload": {"code": ...}}
on protocol violations (after which the server closes the connection).
"""

from __future__ import annotations

import queue
import socket
import threading

from ..framing import Disconnected, recv_frame, send_frame
from .base import BadTopic, Subscription, Transport, check_payload_size, validate_topic


class TcpBroker:
    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._server = socket.create_server((host, port))
        self._lock = threading.Lock()
        self._subscribers: dict[str, list["_ClientConn"]] = {}
        self._conns: list[_ClientConn] = []
        self._closed = False
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.getsockname()[:2]
        return f"{host}:{port}"

    def start(self) -> "TcpBroker":
        self._accept_thread.start()
        return self

    def _accept_loop(self):
        while not self._closed:
            try:
                sock, _ = self._server.accept()
            except OSError:
                return
            conn = _ClientConn(self, sock)
            with self._lock:
                self._conns.append(conn)
            conn.start()

    def _add_subscriber(self, topic: str, conn: "_ClientConn"):
        with self._lock:
            subs = self._subscribers.setdefault(topic, [])
            if conn not in subs:
                subs.append(conn)

    def _broadcast(self, topic: str, payload):
        with self._lock:
            targets = list(self._subscribers.get(topic, ()))
        frame = {"type": "msg", "topic": topic, "payload": payload}
        for conn in targets:
            conn.enqueue(frame)

    def _drop(self, conn: "_ClientConn"):
        with self._lock:
            if conn in self._conns:
                self._conns.remove(conn)
            for subs in self._subscribers.values():
                if conn in subs:
                    subs.remove(conn)

    def close(self):
        self._closed = True
        try:
            self._server.close()
        except OSError:
            pass
        with self._lock:
            conns = list(self._conns)
        for conn in conns:
            conn.close()


class _ClientConn:
    def __init__(self, broker: TcpBroker, sock: socket.socket):
        self._broker = broker
        self._sock = sock
        self._out: queue.Queue = queue.Queue()
        self._send_lock = threading.Lock()
        self._first = True
        self._closed = False

    def start(self):
        threading.Thread(target=self._read_loop, daemon=True).start()
        threading.Thread(target=self._write_loop, daemon=True).start()

    def enqueue(self, frame: dict):
        if not self._closed:
            self._out.put(frame)

    def _fail(self, code: str):
        # Sent synchronously: the read loop closes the socket right after.
        try:
            with self._send_lock:
                send_frame(self._sock, {"type": "err", "payload": {"code": code}})
        except (Disconnected, OSError):
            pass
        self._out.put(None)

    def _read_loop(self):
        try:
            while not self._closed:
                try:
                    frame = recv_frame(self._sock)
                except Disconnected:
                    break
                ftype = frame.get("type") if isinstance(frame, dict) else None
                if ftype not in ("sub", "pub"):
                    self._fail("bad-frame-type" if self._first else "unknown-type")
                    return
                self._first = False
                try:
                    topic = validate_topic(frame.get("topic"))
                except BadTopic:
                    self._fail("bad-topic")
                    return
                if ftype == "sub":
                    self._broker._add_subscriber(topic, self)
                else:
                    self._broker._broadcast(topic, frame.get("payload"))
        finally:
            self.close()

    def _write_loop(self):
        while True:
            frame = self._out.get()
            if frame is None:
                break
            try:
                with self._send_lock:
                    send_frame(self._sock, frame)
            except (Disconnected, OSError):
                break
        self.close()

    def close(self):
        if self._closed:
            return
        self._closed = True
        self._broker._drop(self)
        self._out.put(None)
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass


class TcpTransport(Transport):
    """Client connection to a TcpBroker."""

    def __init__(self, endpoint: str, connect_timeout: float = 5.0):
        host, port = endpoint.rsplit(":", 1)
        self._sock = socket.create_connection((host, int(port)), timeout=connect_timeout)
        self._sock.settimeout(None)
        self._send_lock = threading.Lock()
        self._subs_lock = threading.Lock()
        self._subs: dict[str, list[Subscription]] = {}
        self._closed = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        while not self._closed:
            try:
                frame = recv_frame(self._sock)
            except Exception:  # noqa: BLE001 - socket teardown ends the loop
                return
            if not isinstance(frame, dict):
                continue
            if frame.get("type") == "msg":
                with self._subs_lock:
                    subs = list(self._subs.get(frame.get("topic"), ()))
                for sub in subs:
                    sub.deliver(frame.get("payload"))

    def publish(self, topic: str, payload) -> None:
        if self._closed:
            raise Disconnected("transport closed")
        validate_topic(topic)
        check_payload_size(topic, payload)
        with self._send_lock:
            send_frame(self._sock, {"type": "pub", "topic": topic, "payload": payload})

    def subscribe(self, topic: str, handler) -> Subscription:
        if self._closed:
            raise Disconnected("transport closed")
        validate_topic(topic)
        sub = Subscription(topic, handler, on_close=self._remove)
        with self._subs_lock:
            first = topic not in self._subs or not self._subs[topic]
            self._subs.setdefault(topic, []).append(sub)
        if first:
            with self._send_lock:
                send_frame(self._sock, {"type": "sub", "topic": topic})
        return sub

    def _remove(self, sub: Subscription) -> None:
        with self._subs_lock:
            subs = self._subs.get(sub.topic, [])
            if sub in subs:
                subs.remove(sub)

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        with self._subs_lock:
            subs = [s for lst in self._subs.values() for s in lst]
            self._subs.clear()
        for sub in subs:
            sub.unsubscribe()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
