"""App AAS: the application shell holding the startInspection operation and
the capped run history."""

from __future__ import annotations

import json
import threading

from ..aas import Collection, Operation, Property, Shell, Submodel
from .records import ComparisonReport, InspectionTrace

APP_SHELL_ID = "app-quality-inspection"
RUNS_SUBMODEL = "runs"
CONTROL_SUBMODEL = "control"
START_OPERATION = "startInspection"
DEFAULT_HISTORY_CAP = 50


def build_app_shell() -> Shell:
    return Shell(
        APP_SHELL_ID,
        "application",
        [
            Submodel(CONTROL_SUBMODEL, [Operation(START_OPERATION, ["productHint"], ["accepted", "runId"])]),
            Submodel(RUNS_SUBMODEL, []),
        ],
    )


class RegistryUnavailable(Exception):
    pass


def trace_to_collection(trace: InspectionTrace, report: ComparisonReport | None) -> Collection:
    elements = []
    for index, step in enumerate(trace.steps):
        elements.append(
            Collection(
                f"step{index:02d}",
                [
                    Property("timestamp", "int", step.timestamp),
                    Property("stage", "string", step.stage),
                    Property("payload", "string", json.dumps(step.payload, sort_keys=True)),
                ],
            )
        )
    if report is not None:
        elements.append(
            Collection(
                "report",
                [Property(k, "bool", v) for k, v in report.to_json_dict().items()],
            )
        )
    return Collection(trace.runId, elements)


class AppShellPublisher:
    """Publishes run traces into the app shell, capped at history_cap runs.

    A failed publish retains the trace in memory; retry_pending() (called
    before every publish) pushes retained traces once the registry is back.
    """

    def __init__(self, registry, history_cap: int = DEFAULT_HISTORY_CAP):
        self.registry = registry
        self.history_cap = history_cap
        self._lock = threading.Lock()
        self._retained: list[Collection] = []

    def ensure_registered(self) -> None:
        try:
            self.registry.get_shell(APP_SHELL_ID)
        except Exception:  # noqa: BLE001 - NotFound or transport failure
            self.registry.register(build_app_shell())

    def publish(self, trace: InspectionTrace, report: ComparisonReport | None) -> bool:
        """True when the trace (and any retained backlog) reached the AAS."""
        collection = trace_to_collection(trace, report)
        with self._lock:
            self._retained.append(collection)
            backlog = list(self._retained)
        delivered = 0
        try:
            for item in backlog:
                self.registry.upsert_element(APP_SHELL_ID, RUNS_SUBMODEL, item)
                self._evict_overflow()
                delivered += 1
        except Exception:  # noqa: BLE001 - registry down: keep the rest retained
            with self._lock:
                del self._retained[:delivered]
            return False
        with self._lock:
            del self._retained[:delivered]
        return True

    def retry_pending(self) -> bool:
        with self._lock:
            backlog = list(self._retained)
        delivered = 0
        try:
            for item in backlog:
                self.registry.upsert_element(APP_SHELL_ID, RUNS_SUBMODEL, item)
                self._evict_overflow()
                delivered += 1
        except Exception:  # noqa: BLE001
            pass
        with self._lock:
            del self._retained[:delivered]
        return not self._retained

    def _evict_overflow(self) -> None:
        shell = self.registry.get_shell(APP_SHELL_ID)
        runs = shell.submodel(RUNS_SUBMODEL)
        if runs is None:
            return
        while len(runs.elements) > self.history_cap:
            oldest = runs.elements[0].idShort
            self.registry.remove_element(APP_SHELL_ID, RUNS_SUBMODEL, oldest)
