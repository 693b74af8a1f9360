"""Device onboarding and liveness over the transport.

Devices announce themselves on "platform/onboarding" and then heartbeat on
"platform/heartbeat/{name}". Onboarding registers a device shell with a
nameplate submodel and lists the device in the platform AAS.
"""

from __future__ import annotations

import threading

from ..aas import Property, Shell, Submodel
from ..clock import Clock
from ..configmodel.model import DeviceDef

ONBOARDING_TOPIC = "platform/onboarding"


class DuplicateDevice(Exception):
    pass


def heartbeat_topic(device_name: str) -> str:
    return f"platform/heartbeat/{device_name}"


def device_shell_id(device_name: str) -> str:
    return f"device-{device_name}"


class DeviceRuntime:
    def __init__(self, definition: DeviceDef, shell_id: str):
        self.definition = definition
        self.shell_id = shell_id
        self.state = "onboarded"  # announced -> onboarded -> lost
        self.last_heartbeat_ms = 0


class DeviceManager:
    def __init__(
        self,
        registry,
        transport,
        platform_shell_id: str,
        clock: Clock | None = None,
        heartbeat_interval_ms: int = 2000,
        miss_limit: int = 3,
    ):
        self.registry = registry
        self.transport = transport
        self.platform_shell_id = platform_shell_id
        self.clock = clock or Clock()
        self.heartbeat_interval_ms = heartbeat_interval_ms
        self.miss_limit = miss_limit
        self._lock = threading.Lock()
        self._devices: dict[str, DeviceRuntime] = {}
        if transport is not None:
            transport.subscribe(ONBOARDING_TOPIC, self._on_announce)

    def _on_announce(self, _topic, payload):
        try:
            definition = DeviceDef(
                name=str(payload["name"]),
                kind=str(payload["kind"]),
                ram_mb=int(payload["ramMb"]),
                disk_mb=int(payload["diskMb"]),
                cpu_class=str(payload.get("cpuClass", "generic")),
            )
        except (KeyError, TypeError, ValueError):
            return  # malformed announcement: drop
        try:
            self.onboard_device(definition)
        except DuplicateDevice:
            pass  # duplicate announce keeps the single existing entry

    def onboard_device(self, definition: DeviceDef) -> DeviceRuntime:
        with self._lock:
            if definition.name in self._devices:
                raise DuplicateDevice(definition.name)
            shell_id = device_shell_id(definition.name)
            shell = Shell(
                shell_id,
                "device",
                [
                    Submodel(
                        "nameplate",
                        [
                            Property("name", "string", definition.name),
                            Property("kind", "string", definition.kind),
                            Property("ramMb", "int", definition.ram_mb),
                            Property("diskMb", "int", definition.disk_mb),
                            Property("cpuClass", "string", definition.cpu_class),
                        ],
                    ),
                    Submodel(
                        "status",
                        [
                            Property("online", "bool", True),
                            Property("lastHeartbeat", "int", self.clock.now_ms()),
                        ],
                    ),
                ],
            )
            self.registry.register(shell)
            self.registry.upsert_element(
                self.platform_shell_id, "devices", Property(definition.name, "string", shell_id)
            )
            runtime = DeviceRuntime(definition, shell_id)
            runtime.last_heartbeat_ms = self.clock.now_ms()
            self._devices[definition.name] = runtime
        if self.transport is not None:
            self.transport.subscribe(
                heartbeat_topic(definition.name),
                lambda _t, _p, name=definition.name: self.record_heartbeat(name),
            )
        return runtime

    def record_heartbeat(self, name: str) -> None:
        with self._lock:
            runtime = self._devices.get(name)
            if runtime is None:
                return
            runtime.last_heartbeat_ms = self.clock.now_ms()
            if runtime.state == "lost":
                runtime.state = "onboarded"
                self.registry.set_property(runtime.shell_id, "status", ["online"], True)
            self.registry.set_property(
                runtime.shell_id, "status", ["lastHeartbeat"], runtime.last_heartbeat_ms
            )

    def check_liveness(self) -> None:
        """Mark devices lost after miss_limit missed heartbeats."""
        deadline = self.heartbeat_interval_ms * self.miss_limit
        now = self.clock.now_ms()
        with self._lock:
            for runtime in self._devices.values():
                if runtime.state == "onboarded" and now - runtime.last_heartbeat_ms > deadline:
                    runtime.state = "lost"
                    self.registry.set_property(runtime.shell_id, "status", ["online"], False)

    def device(self, name: str) -> DeviceRuntime | None:
        with self._lock:
            return self._devices.get(name)

    def device_names(self) -> list[str]:
        with self._lock:
            return sorted(self._devices)


class DeviceAgent:
    """The device-side counterpart: announce once, then heartbeat forever.

    Runs on a thread (--in-process) or inside a standalone process whose
    entry point builds a TCP transport first.
    """

    def __init__(self, definition: DeviceDef, transport, clock: Clock | None = None):
        self.definition = definition
        self.transport = transport
        self.clock = clock or Clock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def announce(self) -> None:
        self.transport.publish(
            ONBOARDING_TOPIC,
            {
                "name": self.definition.name,
                "kind": self.definition.kind,
                "ramMb": self.definition.ram_mb,
                "diskMb": self.definition.disk_mb,
                "cpuClass": self.definition.cpu_class,
            },
        )

    def heartbeat(self) -> None:
        self.transport.publish(heartbeat_topic(self.definition.name), {"ts": self.clock.now_ms()})

    def start(self, interval_ms: int = 2000) -> None:
        self.announce()
        self.heartbeat()

        def loop():
            while not self._stop.wait(interval_ms / 1000.0):
                try:
                    self.heartbeat()
                except Exception:  # noqa: BLE001 - broker may be shutting down
                    return

        self._thread = threading.Thread(target=loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
