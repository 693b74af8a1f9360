"""In-process shell registry: the single synchronized authority for shells.

The HTTP API in `server` is a thin wrapper around this class; platform
components running in the same process use it directly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from ..clock import Clock
from . import model
from .errors import Conflict, HandlerError, NotFound, TypeMismatch


@dataclass(frozen=True)
class RegistryEntry:
    id: str
    endpoint: str
    registeredAt: int  # ms since epoch


class Registry:
    def __init__(self, clock: Clock | None = None, default_endpoint: str = "local"):
        self._clock = clock or Clock()
        self._default_endpoint = default_endpoint
        self._lock = threading.RLock()
        self._shells: dict[str, model.Shell] = {}
        self._entries: dict[str, RegistryEntry] = {}
        self._handlers: dict[tuple[str, str, str], object] = {}

    # -- registration ----------------------------------------------------

    def register(self, shell: model.Shell, endpoint: str | None = None) -> RegistryEntry:
        endpoint = endpoint or self._default_endpoint
        with self._lock:
            existing = self._entries.get(shell.id)
            if existing is not None and existing.endpoint != endpoint:
                raise Conflict(
                    f"shell {shell.id!r} already registered at {existing.endpoint!r}"
                )
            if existing is not None:
                self._shells[shell.id] = shell
                return existing
            entry = RegistryEntry(shell.id, endpoint, self._clock.now_ms())
            self._entries[shell.id] = entry
            self._shells[shell.id] = shell
            return entry

    def resolve(self, shell_id: str) -> str:
        with self._lock:
            entry = self._entries.get(shell_id)
            if entry is None:
                raise NotFound(f"shell {shell_id!r} not registered")
            return entry.endpoint

    def deregister(self, shell_id: str) -> None:
        with self._lock:
            if shell_id not in self._entries:
                raise NotFound(f"shell {shell_id!r} not registered")
            del self._entries[shell_id]
            del self._shells[shell_id]
            for key in [k for k in self._handlers if k[0] == shell_id]:
                del self._handlers[key]

    def list_entries(self) -> list[RegistryEntry]:
        with self._lock:
            return sorted(self._entries.values(), key=lambda e: e.id)

    def shell_kinds(self) -> dict[str, str]:
        with self._lock:
            return {sid: shell.assetKind for sid, shell in self._shells.items()}

    # -- shell content ---------------------------------------------------

    def get_shell(self, shell_id: str) -> model.Shell:
        with self._lock:
            shell = self._shells.get(shell_id)
            if shell is None:
                raise NotFound(f"shell {shell_id!r} not registered")
            return shell

    def get_shell_json(self, shell_id: str) -> dict:
        with self._lock:
            return self.get_shell(shell_id).to_json_dict()

    def _resolve_path(self, shell_id: str, submodel: str, path: list[str]):
        shell = self.get_shell(shell_id)
        sm = shell.submodel(submodel)
        if sm is None:
            raise NotFound(f"submodel {submodel!r} not in shell {shell_id!r}")
        if not path:
            raise NotFound("empty property path")
        node = sm
        for i, step in enumerate(path):
            nxt = node.find(step) if hasattr(node, "find") else None
            if nxt is None and isinstance(node, model.Collection):
                nxt = next((el for el in node.elements if el.idShort == step), None)
            if nxt is None:
                raise NotFound(f"path {'/'.join(path[: i + 1])!r} not found in {submodel!r}")
            node = nxt
        return node

    def get_property(self, shell_id: str, submodel: str, path: list[str]):
        with self._lock:
            node = self._resolve_path(shell_id, submodel, path)
            if not isinstance(node, model.Property):
                raise NotFound(f"path {'/'.join(path)!r} is not a Property")
            return node.valueType, node.value

    def set_property(self, shell_id: str, submodel: str, path: list[str], value):
        with self._lock:
            node = self._resolve_path(shell_id, submodel, path)
            if not isinstance(node, model.Property):
                raise NotFound(f"path {'/'.join(path)!r} is not a Property")
            model.check_value(node.valueType, value)
            node.value = value
            return node

    def ensure_submodel(self, shell_id: str, submodel: str) -> model.Submodel:
        """Fetch or create an (empty) submodel on a registered shell."""
        with self._lock:
            shell = self.get_shell(shell_id)
            sm = shell.submodel(submodel)
            if sm is None:
                sm = model.Submodel(submodel)
                shell.submodels.append(sm)
            return sm

    def upsert_element(self, shell_id: str, submodel: str, element) -> None:
        with self._lock:
            sm = self.ensure_submodel(shell_id, submodel)
            for i, el in enumerate(sm.elements):
                if el.idShort == element.idShort:
                    sm.elements[i] = element
                    return
            sm.elements.append(element)

    def remove_element(self, shell_id: str, submodel: str, id_short: str) -> bool:
        with self._lock:
            sm = self.ensure_submodel(shell_id, submodel)
            for i, el in enumerate(sm.elements):
                if el.idShort == id_short:
                    del sm.elements[i]
                    return True
            return False

    # -- operations ------------------------------------------------------

    def bind_handler(self, shell_id: str, submodel: str, op: str, handler) -> None:
        with self._lock:
            self._handlers[(shell_id, submodel, op)] = handler

    def invoke(self, shell_id: str, submodel: str, op: str, args: dict):
        with self._lock:
            node = self._resolve_path(shell_id, submodel, [op])
            if not isinstance(node, model.Operation):
                raise NotFound(f"{op!r} is not an Operation")
            handler = self._handlers.get((shell_id, submodel, op))
            if handler is None:
                raise NotFound(f"no handler bound for operation {op!r}")
        # Handlers run outside the lock so they may run concurrently with reads.
        try:
            return handler(args or {})
        except Exception as exc:  # noqa: BLE001 - wrapped and surfaced to callers
            raise HandlerError(str(exc)) from exc
