"""Simulated machine with a browsable node tree (read/write/subscribe).

Mimics OPC UA semantics over the platform's length-prefixed JSON frames; it
is not wire-compatible OPC UA. The node tree is bootstrapped from JSON: an
object is an interior node, any other JSON value a typed leaf.
"""

from __future__ import annotations

import json
import socket
import threading
from pathlib import Path

from ..clock import Clock
from ..framing import Disconnected, recv_frame, send_frame


class NodeNotFound(Exception):
    pass


class NodeTypeMismatch(Exception):
    pass


DEFAULT_MODEL = {
    "Button": {"Pressed": False},
    "Cobot": {"TargetPosition": "qr", "Position": "qr", "Moving": False},
}


def _same_type(existing, value) -> bool:
    if isinstance(existing, bool) or isinstance(value, bool):
        return isinstance(existing, bool) and isinstance(value, bool)
    if isinstance(existing, float):
        return isinstance(value, (int, float))
    return type(existing) is type(value)


class MachineModel:
    """Thread-safe node tree; writes are serialized, changes notify subscribers."""

    def __init__(self, tree: dict | None = None, clock: Clock | None = None):
        self._tree = json.loads(json.dumps(tree if tree is not None else DEFAULT_MODEL))
        self._clock = clock or Clock()
        self._lock = threading.RLock()
        self._subs: list[tuple[int, tuple[str, ...], object]] = []
        self._next_sub = 1

    @classmethod
    def from_file(cls, path, clock: Clock | None = None) -> "MachineModel":
        return cls(json.loads(Path(path).read_text()), clock=clock)

    def _node(self, path: list[str]):
        if not path:
            raise NodeNotFound("empty path")
        node = self._tree
        for i, step in enumerate(path):
            if not isinstance(node, dict) or step not in node:
                raise NodeNotFound("/".join(path[: i + 1]))
            node = node[step]
        return node

    def read(self, path: list[str]):
        with self._lock:
            node = self._node(path)
            return json.loads(json.dumps(node)) if isinstance(node, dict) else node

    def write(self, path: list[str], value) -> bool:
        """Returns True when the value changed (and subscribers were notified)."""
        with self._lock:
            parent = self._node(path[:-1]) if len(path) > 1 else self._tree
            leaf = path[-1]
            if not isinstance(parent, dict) or leaf not in parent:
                raise NodeNotFound("/".join(path))
            existing = parent[leaf]
            if isinstance(existing, dict):
                raise NodeTypeMismatch(f"{'/'.join(path)} is an interior node")
            if not _same_type(existing, value):
                raise NodeTypeMismatch(
                    f"{'/'.join(path)}: cannot write {type(value).__name__} over {type(existing).__name__}"
                )
            if existing == value and type(existing) is type(value):
                return False  # change-driven: equal write is a no-op
            parent[leaf] = value
            subs = [cb for _, prefix, cb in self._subs if tuple(path[: len(prefix)]) == prefix]
            ts = self._clock.now_ms()
        for cb in subs:
            cb(list(path), value, ts)
        return True

    def subscribe(self, path: list[str], callback) -> int:
        """callback(path, new_value, timestamp_ms) on every change of the
        addressed leaf or any descendant leaf."""
        with self._lock:
            self._node(path)  # must exist
            sub_id = self._next_sub
            self._next_sub += 1
            self._subs.append((sub_id, tuple(path), callback))
            return sub_id

    def unsubscribe(self, sub_id: int) -> None:
        with self._lock:
            self._subs = [s for s in self._subs if s[0] != sub_id]


class CobotSim:
    """Positional moves with configurable latency on the Cobot subtree.

    Writing TargetPosition starts a move: Moving goes True, and after
    move_latency_s the Position follows and Moving drops back to False.
    """

    def __init__(self, model: MachineModel, move_latency_s: float = 0.5):
        self.model = model
        self.move_latency_s = move_latency_s
        self._lock = threading.Lock()
        self._pending: threading.Timer | None = None
        model.subscribe(["Cobot", "TargetPosition"], self._on_target)

    def _on_target(self, path, value, ts):
        with self._lock:
            if self._pending is not None:
                self._pending.cancel()
            self.model.write(["Cobot", "Moving"], True)
            timer = threading.Timer(self.move_latency_s, self._arrive, args=(value,))
            timer.daemon = True
            self._pending = timer
            timer.start()

    def _arrive(self, position):
        with self._lock:
            self._pending = None
        self.model.write(["Cobot", "Position"], position)
        self.model.write(["Cobot", "Moving"], False)

    def cancel(self):
        with self._lock:
            if self._pending is not None:
                self._pending.cancel()
                self._pending = None


class MachineServer:
    """Serves a MachineModel over TCP.

    Request frames carry an "id" echoed in the reply; events carry none.
    """

    def __init__(self, model: MachineModel, host: str = "127.0.0.1", port: int = 0):
        self.model = model
        self._server = socket.create_server((host, port))
        self._closed = False
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.getsockname()[:2]
        return f"{host}:{port}"

    def start(self) -> "MachineServer":
        self._thread.start()
        return self

    def _accept_loop(self):
        while not self._closed:
            try:
                sock, _ = self._server.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_client, args=(sock,), daemon=True).start()

    def _serve_client(self, sock: socket.socket):
        send_lock = threading.Lock()
        sub_ids: list[int] = []

        def push_event(path, value, ts):
            try:
                with send_lock:
                    send_frame(sock, {"type": "event", "path": path, "value": value, "ts": ts})
            except (Disconnected, OSError):
                pass

        try:
            while True:
                try:
                    frame = recv_frame(sock)
                except Disconnected:
                    return
                req_id = frame.get("id")
                ftype = frame.get("type")
                path = frame.get("path") or []
                try:
                    if ftype == "read":
                        reply = {"type": "read", "id": req_id, "value": self.model.read(path)}
                    elif ftype == "write":
                        self.model.write(path, frame.get("value"))
                        reply = {"type": "write", "id": req_id, "ok": True}
                    elif ftype == "sub":
                        sub_ids.append(self.model.subscribe(path, push_event))
                        reply = {"type": "sub", "id": req_id, "ok": True}
                    else:
                        reply = {
                            "type": "err",
                            "id": req_id,
                            "value": {"code": "unknown-type", "message": str(ftype)},
                        }
                except NodeNotFound as exc:
                    reply = {"type": "err", "id": req_id, "value": {"code": "not-found", "message": str(exc)}}
                except NodeTypeMismatch as exc:
                    reply = {"type": "err", "id": req_id, "value": {"code": "type-mismatch", "message": str(exc)}}
                with send_lock:
                    send_frame(sock, reply)
        finally:
            for sid in sub_ids:
                self.model.unsubscribe(sid)
            try:
                sock.close()
            except OSError:
                pass

    def close(self):
        self._closed = True
        try:
            self._server.close()
        except OSError:
            pass


class MachineClient:
    """Protocol client: synchronous read/write, push-driven subscriptions."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        host, port = endpoint.rsplit(":", 1)
        self._sock = socket.create_connection((host, int(port)), timeout=5.0)
        self._sock.settimeout(None)
        self._send_lock = threading.Lock()
        self._pending: dict[int, object] = {}
        self._pending_lock = threading.Lock()
        self._handlers: list[tuple[tuple[str, ...], object]] = []
        self._next_id = 1
        self._timeout = timeout
        self._closed = False
        threading.Thread(target=self._read_loop, daemon=True).start()

    def _read_loop(self):
        import queue as _q

        while not self._closed:
            try:
                frame = recv_frame(self._sock)
            except Exception:  # noqa: BLE001
                return
            if frame.get("type") == "event":
                path = tuple(frame.get("path") or ())
                for prefix, handler in list(self._handlers):
                    if path[: len(prefix)] == prefix:
                        handler(list(path), frame.get("value"), frame.get("ts"))
                continue
            with self._pending_lock:
                waiter = self._pending.pop(frame.get("id"), None)
            if waiter is not None:
                waiter.put(frame)

    def _request(self, frame: dict) -> dict:
        import queue as _q

        waiter: _q.Queue = _q.Queue()
        with self._pending_lock:
            req_id = self._next_id
            self._next_id += 1
            self._pending[req_id] = waiter
        frame["id"] = req_id
        with self._send_lock:
            send_frame(self._sock, frame)
        reply = waiter.get(timeout=self._timeout)
        if reply.get("type") == "err":
            info = reply.get("value") or {}
            if info.get("code") == "not-found":
                raise NodeNotFound(info.get("message", ""))
            if info.get("code") == "type-mismatch":
                raise NodeTypeMismatch(info.get("message", ""))
            raise RuntimeError(f"machine protocol error: {info}")
        return reply

    def read(self, path: list[str]):
        return self._request({"type": "read", "path": list(path)})["value"]

    def write(self, path: list[str], value) -> None:
        self._request({"type": "write", "path": list(path), "value": value})

    def subscribe(self, path: list[str], handler) -> None:
        """handler(path, value, ts) for each change event under path."""
        self._handlers.append((tuple(path), handler))
        self._request({"type": "sub", "path": list(path)})

    def close(self):
        self._closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
