"""Transport contract shared by the in-memory and TCP backends.

Semantics: exact-match topics, broadcast fan-out to all current subscribers,
at-most-once delivery, FIFO per (publisher, topic). No persistence, no QoS.
"""

from __future__ import annotations

import queue
import threading
from abc import ABC, abstractmethod

from ..framing import Disconnected, FrameTooLarge, encode_frame

__all__ = ["BadTopic", "Disconnected", "FrameTooLarge", "validate_topic", "Subscription", "Transport"]

_FORBIDDEN = set("+#*")


class BadTopic(ValueError):
    pass


def validate_topic(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise BadTopic("topic must be a non-empty string")
    segments = name.split("/")
    if any(seg == "" for seg in segments):
        raise BadTopic(f"topic {name!r} has an empty segment")
    if any(ch in _FORBIDDEN for ch in name):
        raise BadTopic(f"topic {name!r} contains a wildcard character")
    return name


def check_payload_size(topic: str, payload) -> None:
    # Shared size rule: both backends reject what would not fit in a frame.
    encode_frame({"type": "pub", "topic": topic, "payload": payload})


class Subscription:
    """Handle delivering messages to one handler, serially and in order."""

    def __init__(self, topic: str, handler, on_close=None):
        self.topic = topic
        self._handler = handler
        self._queue: queue.Queue = queue.Queue()
        self._on_close = on_close
        self._active = True
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def _run(self):
        while True:
            item = self._queue.get()
            if item is _STOP:
                return
            if not self._active:
                continue
            try:
                self._handler(self.topic, item)
            except Exception:  # noqa: BLE001 - a failing handler must not kill delivery
                pass

    def deliver(self, payload) -> None:
        if self._active:
            self._queue.put(payload)

    def unsubscribe(self) -> None:
        self._active = False
        self._queue.put(_STOP)
        if self._on_close is not None:
            self._on_close(self)

    def drain(self, timeout: float = 5.0) -> None:
        """Block until queued deliveries were handed to the handler (tests)."""
        import time

        deadline = time.monotonic() + timeout
        while not self._queue.empty() and time.monotonic() < deadline:
            time.sleep(0.002)


_STOP = object()


class Transport(ABC):
    """One client's connection to a broker."""

    @abstractmethod
    def publish(self, topic: str, payload) -> None: ...

    @abstractmethod
    def subscribe(self, topic: str, handler) -> Subscription: ...

    @abstractmethod
    def close(self) -> None: ...
