"""HTTP client for the registry API, raising the same errors as the in-process registry."""

from __future__ import annotations

import requests

from . import model
from .errors import AasError, BadRequest, Conflict, HandlerError, NotFound, TypeMismatch

_ERRORS = {
    "BadRequest": BadRequest,
    "NotFound": NotFound,
    "Conflict": Conflict,
    "TypeMismatch": TypeMismatch,
    "HandlerError": HandlerError,
}


def _check(resp: requests.Response):
    if resp.status_code < 400:
        return resp
    try:
        doc = resp.json()
    except ValueError:
        doc = {}
    cls = _ERRORS.get(doc.get("error"), AasError)
    raise cls(doc.get("message", f"http {resp.status_code}"))


class RegistryClient:
    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.base = f"http://{endpoint}" if "://" not in endpoint else endpoint
        self.timeout = timeout
        self._session = requests.Session()

    def register(self, shell: model.Shell, endpoint: str | None = None) -> dict:
        doc = shell.to_json_dict()
        if endpoint is not None:
            doc["endpoint"] = endpoint
        resp = self._session.put(f"{self.base}/shells/{shell.id}", json=doc, timeout=self.timeout)
        return _check(resp).json()

    def list_shells(self) -> list[dict]:
        resp = self._session.get(f"{self.base}/shells", timeout=self.timeout)
        return _check(resp).json()["shells"]

    def get_shell(self, shell_id: str) -> model.Shell:
        resp = self._session.get(f"{self.base}/shells/{shell_id}", timeout=self.timeout)
        return model.shell_from_json(_check(resp).json())

    def deregister(self, shell_id: str) -> None:
        _check(self._session.delete(f"{self.base}/shells/{shell_id}", timeout=self.timeout))

    def get_submodel(self, shell_id: str, submodel: str) -> model.Submodel:
        resp = self._session.get(
            f"{self.base}/shells/{shell_id}/submodels/{submodel}", timeout=self.timeout
        )
        return model.submodel_from_json(_check(resp).json())

    def get_property(self, shell_id: str, submodel: str, path: list[str]):
        resp = self._session.get(
            f"{self.base}/shells/{shell_id}/submodels/{submodel}/properties/{'.'.join(path)}",
            timeout=self.timeout,
        )
        doc = _check(resp).json()
        return doc["valueType"], doc["value"]

    def set_property(self, shell_id: str, submodel: str, path: list[str], value) -> dict:
        resp = self._session.patch(
            f"{self.base}/shells/{shell_id}/submodels/{submodel}/properties/{'.'.join(path)}",
            json={"value": value},
            timeout=self.timeout,
        )
        return _check(resp).json()

    def invoke(self, shell_id: str, submodel: str, op: str, args: dict | None = None):
        resp = self._session.post(
            f"{self.base}/shells/{shell_id}/submodels/{submodel}/operations/{op}/invoke",
            json={"args": args or {}},
            timeout=self.timeout,
        )
        return _check(resp).json()["result"]
