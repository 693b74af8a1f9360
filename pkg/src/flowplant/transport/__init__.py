"""Pluggable publish/subscribe transport with interchangeable backends."""

from __future__ import annotations

from .base import BadTopic, Disconnected, FrameTooLarge, Subscription, Transport, validate_topic
from .memory import InMemoryBroker, InMemoryTransport
from .tcp import TcpBroker, TcpTransport

BACKENDS = ("in_memory", "tcp")


class TransportStack:
    """A running broker plus a client factory, selected by backend name."""

    def __init__(self, backend: str = "in_memory", endpoint: str | None = None):
        if backend not in BACKENDS:
            raise ValueError(f"unknown transport backend {backend!r}; known: {BACKENDS}")
        self.backend = backend
        self._broker = None
        self.endpoint = endpoint
        if backend == "in_memory":
            self._broker = InMemoryBroker()
        elif endpoint is None:
            self._broker = TcpBroker().start()
            self.endpoint = self._broker.endpoint

    def client(self) -> Transport:
        if self.backend == "in_memory":
            return self._broker.client()
        return TcpTransport(self.endpoint)

    def close(self) -> None:
        if self._broker is not None:
            self._broker.close()


__all__ = [
    "BACKENDS",
    "BadTopic",
    "Disconnected",
    "FrameTooLarge",
    "InMemoryBroker",
    "InMemoryTransport",
    "Subscription",
    "TcpBroker",
    "TcpTransport",
    "Transport",
    "TransportStack",
    "validate_topic",
]
