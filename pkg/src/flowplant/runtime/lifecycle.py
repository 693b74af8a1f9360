"""Service lifecycle supervision.

The supervisor is event-driven: `tick()` advances timeout bookkeeping and is
called by a heartbeat loop in live operation or directly by tests with a
fake clock. The underlying start command of a service is issued exactly once
per Starting phase, no matter how many heartbeat ticks elapse before the
service reports ready.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

from ..clock import Clock


class ServiceState(enum.Enum):
    Created = "Created"
    Starting = "Starting"
    Running = "Running"
    Stopping = "Stopping"
    Stopped = "Stopped"
    Failed = "Failed"


LEGAL_TRANSITIONS = {
    (ServiceState.Created, ServiceState.Starting),
    (ServiceState.Stopped, ServiceState.Starting),
    (ServiceState.Starting, ServiceState.Running),
    (ServiceState.Starting, ServiceState.Failed),
    (ServiceState.Running, ServiceState.Stopping),
    (ServiceState.Stopping, ServiceState.Stopped),
    (ServiceState.Stopping, ServiceState.Failed),
    (ServiceState.Created, ServiceState.Failed),
    (ServiceState.Running, ServiceState.Failed),
    (ServiceState.Stopped, ServiceState.Failed),
}


class IllegalTransition(Exception):
    pass


class UnknownServiceError(Exception):
    pass


@dataclass
class ServiceHandle:
    """One supervised service.

    start_fn() -> bool: issue the underlying start; True means ready now,
    False means readiness arrives later via notify_ready().
    stop_fn() -> bool: request shutdown; True means stopped now, False means
    completion arrives via notify_stopped() or the stop timeout fires.
    kill_fn(): hard termination after a stop timeout (optional).
    """

    name: str
    start_fn: object = None
    stop_fn: object = None
    kill_fn: object = None
    startup_timeout_ms: int = 60_000
    stop_timeout_ms: int = 10_000

    state: ServiceState = ServiceState.Created
    start_count: int = 0  # underlying start commands issued, ever
    deadline_ms: int | None = None
    transition_log: list = field(default_factory=list)


class Supervisor:
    def __init__(self, clock: Clock | None = None, heartbeat_interval_ms: int = 2000):
        self.clock = clock or Clock()
        self.heartbeat_interval_ms = heartbeat_interval_ms
        self._lock = threading.RLock()
        self._services: dict[str, ServiceHandle] = {}
        self._loop_stop = threading.Event()
        self._loop_thread: threading.Thread | None = None

    def add(self, handle: ServiceHandle) -> ServiceHandle:
        with self._lock:
            if handle.name in self._services:
                raise ValueError(f"service {handle.name!r} already supervised")
            self._services[handle.name] = handle
            return handle

    def _handle(self, name: str) -> ServiceHandle:
        handle = self._services.get(name)
        if handle is None:
            raise UnknownServiceError(name)
        return handle

    def state(self, name: str) -> ServiceState:
        with self._lock:
            return self._handle(name).state

    def states(self) -> dict[str, ServiceState]:
        with self._lock:
            return {name: h.state for name, h in self._services.items()}

    def _transition(self, handle: ServiceHandle, target: ServiceState) -> None:
        if (handle.state, target) not in LEGAL_TRANSITIONS:
            raise IllegalTransition(f"{handle.name}: {handle.state.value} -> {target.value}")
        handle.transition_log.append((self.clock.now_ms(), handle.state, target))
        handle.state = target

    # -- lifecycle commands (serialized per supervisor lock) --------------

    def start_service(self, name: str) -> ServiceState:
        """Strict variant: raises IllegalTransition unless Created or Stopped."""
        with self._lock:
            handle = self._handle(name)
            self._transition(handle, ServiceState.Starting)
            handle.deadline_ms = self.clock.now_ms() + handle.startup_timeout_ms
            handle.start_count += 1
            start_fn = handle.start_fn
        ready_now = bool(start_fn()) if start_fn else True
        if ready_now:
            self.notify_ready(name)
        with self._lock:
            return self._handle(name).state

    def ensure_started(self, name: str) -> ServiceState:
        """Idempotent variant: no-op (returns current state) unless startable."""
        with self._lock:
            handle = self._handle(name)
            if handle.state not in (ServiceState.Created, ServiceState.Stopped):
                return handle.state
        return self.start_service(name)

    def notify_ready(self, name: str) -> None:
        with self._lock:
            handle = self._handle(name)
            if handle.state is ServiceState.Starting:
                self._transition(handle, ServiceState.Running)
                handle.deadline_ms = None

    def stop_service(self, name: str) -> ServiceState:
        with self._lock:
            handle = self._handle(name)
            self._transition(handle, ServiceState.Stopping)
            handle.deadline_ms = self.clock.now_ms() + handle.stop_timeout_ms
            stop_fn = handle.stop_fn
        stopped_now = bool(stop_fn()) if stop_fn else True
        if stopped_now:
            self.notify_stopped(name)
        with self._lock:
            return self._handle(name).state

    def notify_stopped(self, name: str) -> None:
        with self._lock:
            handle = self._handle(name)
            if handle.state is ServiceState.Stopping:
                self._transition(handle, ServiceState.Stopped)
                handle.deadline_ms = None

    def notify_failed(self, name: str) -> None:
        with self._lock:
            handle = self._handle(name)
            if handle.state is not ServiceState.Failed:
                self._transition(handle, ServiceState.Failed)
                handle.deadline_ms = None

    # -- heartbeat -------------------------------------------------------

    def tick(self) -> None:
        """Advance timeout bookkeeping. Never re-issues a start command:
        a service still Starting merely stays Starting until its deadline."""
        now = self.clock.now_ms()
        expired: list[tuple[ServiceHandle, ServiceState]] = []
        with self._lock:
            for handle in self._services.values():
                if handle.deadline_ms is None or now < handle.deadline_ms:
                    continue
                if handle.state is ServiceState.Starting:
                    self._transition(handle, ServiceState.Failed)
                    handle.deadline_ms = None
                    expired.append((handle, ServiceState.Starting))
                elif handle.state is ServiceState.Stopping:
                    self._transition(handle, ServiceState.Failed)
                    handle.deadline_ms = None
                    expired.append((handle, ServiceState.Stopping))
        for handle, _phase in expired:
            if handle.kill_fn:
                try:
                    handle.kill_fn()
                except Exception:  # noqa: BLE001
                    pass

    def run_heartbeat_loop(self) -> None:
        """Background real-time tick loop for live operation."""
        if self._loop_thread is not None:
            return
        self._loop_stop.clear()

        def loop():
            while not self._loop_stop.wait(self.heartbeat_interval_ms / 1000.0):
                self.tick()

        self._loop_thread = threading.Thread(target=loop, daemon=True)
        self._loop_thread.start()

    def shutdown(self) -> None:
        self._loop_stop.set()
        if self._loop_thread is not None:
            self._loop_thread.join(timeout=5)
            self._loop_thread = None
        for name, state in self.states().items():
            if state is ServiceState.Running:
                try:
                    self.stop_service(name)
                except IllegalTransition:
                    pass
