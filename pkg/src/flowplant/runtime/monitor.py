"""Latency/heartbeat monitoring mirrored into the platform AAS.

Records live in memory and are pushed into the platform shell's "monitoring"
submodel at most once per mirror interval (plus on explicit flush), so a
chatty service cannot flood the registry.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from ..aas import Collection, Property
from ..clock import Clock


class UnknownService(Exception):
    pass


@dataclass
class MonitoringRecord:
    serviceName: str
    messageCount: int = 0
    meanLatencyMs: float = 0.0
    maxLatencyMs: float = 0.0
    lastHeartbeat: int = 0

    def to_collection(self) -> Collection:
        return Collection(
            self.serviceName,
            [
                Property("messageCount", "int", self.messageCount),
                Property("meanLatencyMs", "double", self.meanLatencyMs),
                Property("maxLatencyMs", "double", self.maxLatencyMs),
                Property("lastHeartbeat", "int", self.lastHeartbeat),
            ],
        )


class MonitoringSink:
    def __init__(
        self,
        clock: Clock | None = None,
        registry=None,
        platform_shell_id: str | None = None,
        mirror_interval_ms: int = 2000,
    ):
        self.clock = clock or Clock()
        self.registry = registry
        self.platform_shell_id = platform_shell_id
        self.mirror_interval_ms = mirror_interval_ms
        self._lock = threading.Lock()
        self._records: dict[str, MonitoringRecord] = {}
        self._totals: dict[str, float] = {}
        self._last_mirror_ms = 0
        self._dirty: set[str] = set()

    def register_service(self, name: str) -> MonitoringRecord:
        with self._lock:
            record = self._records.get(name)
            if record is None:
                record = MonitoringRecord(serviceName=name)
                self._records[name] = record
                self._totals[name] = 0.0
            return record

    def record_latency(self, name: str, latency_ms: float) -> MonitoringRecord:
        if latency_ms < 0:
            raise ValueError("latency must be >= 0")
        now = self.clock.now_ms()
        with self._lock:
            record = self._records.get(name)
            if record is None:
                raise UnknownService(name)
            record.messageCount += 1
            self._totals[name] += latency_ms
            record.meanLatencyMs = self._totals[name] / record.messageCount
            record.maxLatencyMs = max(record.maxLatencyMs, latency_ms)
            record.lastHeartbeat = now
            self._dirty.add(name)
            due = now - self._last_mirror_ms >= self.mirror_interval_ms
            snapshot = MonitoringRecord(**vars(record))
        if due:
            self.flush()
        return snapshot

    def record(self, name: str) -> MonitoringRecord:
        with self._lock:
            record = self._records.get(name)
            if record is None:
                raise UnknownService(name)
            return MonitoringRecord(**vars(record))

    def all_records(self) -> dict[str, MonitoringRecord]:
        with self._lock:
            return {n: MonitoringRecord(**vars(r)) for n, r in self._records.items()}

    def flush(self) -> None:
        """Mirror dirty records into the platform AAS immediately."""
        if self.registry is None or self.platform_shell_id is None:
            return
        with self._lock:
            dirty = [MonitoringRecord(**vars(self._records[n])) for n in self._dirty]
            self._dirty.clear()
            self._last_mirror_ms = self.clock.now_ms()
        for record in dirty:
            self.registry.upsert_element(
                self.platform_shell_id, "monitoring", record.to_collection()
            )
