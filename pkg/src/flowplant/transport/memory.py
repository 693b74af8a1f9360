"""In-memory broker backend: same contract as TCP, zero sockets."""

from __future__ import annotations

import threading

from .base import Disconnected, Subscription, Transport, check_payload_size, validate_topic


class InMemoryBroker:
    def __init__(self):
        self._lock = threading.Lock()
        self._subs: dict[str, list[Subscription]] = {}
        self._closed = False

    def client(self) -> "InMemoryTransport":
        return InMemoryTransport(self)

    def _publish(self, topic: str, payload) -> None:
        if self._closed:
            raise Disconnected("broker closed")
        with self._lock:
            targets = list(self._subs.get(topic, ()))
        for sub in targets:
            sub.deliver(payload)

    def _subscribe(self, topic: str, handler) -> Subscription:
        if self._closed:
            raise Disconnected("broker closed")
        sub = Subscription(topic, handler, on_close=self._remove)
        with self._lock:
            self._subs.setdefault(topic, []).append(sub)
        return sub

    def _remove(self, sub: Subscription) -> None:
        with self._lock:
            subs = self._subs.get(sub.topic, [])
            if sub in subs:
                subs.remove(sub)

    def close(self) -> None:
        self._closed = True
        with self._lock:
            subs = [s for lst in self._subs.values() for s in lst]
            self._subs.clear()
        for sub in subs:
            sub.unsubscribe()


class InMemoryTransport(Transport):
    def __init__(self, broker: InMemoryBroker):
        self._broker = broker
        self._subs: list[Subscription] = []
        self._closed = False

    def publish(self, topic: str, payload) -> None:
        if self._closed:
            raise Disconnected("transport closed")
        validate_topic(topic)
        check_payload_size(topic, payload)
        self._broker._publish(topic, payload)

    def subscribe(self, topic: str, handler) -> Subscription:
        if self._closed:
            raise Disconnected("transport closed")
        validate_topic(topic)
        sub = self._broker._subscribe(topic, handler)
        self._subs.append(sub)
        return sub

    def close(self) -> None:
        self._closed = True
        for sub in self._subs:
            sub.unsubscribe()
        self._subs.clear()
