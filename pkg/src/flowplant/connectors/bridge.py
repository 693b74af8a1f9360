"""Connector instances bridging external systems into the platform data flow."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..transport import Transport, validate_topic
from .machine import MachineClient


@dataclass(frozen=True)
class ConnectorSpec:
    kind: str  # "machine" | "aas"
    endpoint: str
    output_topic: str
    subscriptions: tuple = field(default_factory=tuple)  # machine only: NodeAddress list

    def __post_init__(self):
        if self.kind not in ("machine", "aas"):
            raise ValueError(f"unknown connector kind {self.kind!r}")
        validate_topic(self.output_topic)
        if self.kind == "machine" and not self.subscriptions:
            raise ValueError("machine connector needs at least one subscription")


class MachineConnector:
    """Forwards machine change events onto the configured transport topic.

    Each event payload: {"path": [...], "value": ..., "ts": ...}.
    """

    def __init__(self, spec: ConnectorSpec, transport: Transport):
        if spec.kind != "machine":
            raise ValueError("spec is not a machine connector spec")
        self.spec = spec
        self._transport = transport
        self._client = MachineClient(spec.endpoint)
        for address in spec.subscriptions:
            self._client.subscribe(list(address), self._forward)

    def _forward(self, path, value, ts):
        self._transport.publish(
            self.spec.output_topic, {"path": path, "value": value, "ts": ts}
        )

    @property
    def machine(self) -> MachineClient:
        return self._client

    def close(self):
        self._client.close()
