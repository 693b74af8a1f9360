"""Reduced AAS data model: shells, submodels and three element kinds.

Elements are Property (typed value), Operation (named in/out parameters) and
Collection (nested elements). idShorts must be unique among siblings; this is
checked at construction and again when deserializing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import BadRequest, TypeMismatch

ASSET_KINDS = ("product", "device", "service", "application", "platform")
VALUE_TYPES = ("string", "int", "double", "bool")

_ID_RE = re.compile(r"^\S+$")


def check_value(value_type: str, value) -> None:
    if value_type == "string":
        ok = isinstance(value, str)
    elif value_type == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif value_type == "double":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif value_type == "bool":
        ok = isinstance(value, bool)
    else:
        raise BadRequest(f"unknown valueType {value_type!r}")
    if not ok:
        raise TypeMismatch(f"value {value!r} does not match valueType {value_type!r}")


def _check_id_short(id_short: str) -> None:
    if not id_short or not _ID_RE.match(id_short):
        raise BadRequest(f"invalid idShort {id_short!r}")


def _check_unique(elements) -> None:
    seen = set()
    for el in elements:
        if el.idShort in seen:
            raise BadRequest(f"duplicate idShort {el.idShort!r} among siblings")
        seen.add(el.idShort)


@dataclass
class Property:
    idShort: str
    valueType: str
    value: object

    def __post_init__(self):
        _check_id_short(self.idShort)
        check_value(self.valueType, self.value)

    def to_json_dict(self) -> dict:
        return {
            "idShort": self.idShort,
            "kind": "Property",
            "valueType": self.valueType,
            "value": self.value,
        }


@dataclass
class Operation:
    idShort: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    def __post_init__(self):
        _check_id_short(self.idShort)

    def to_json_dict(self) -> dict:
        return {
            "idShort": self.idShort,
            "kind": "Operation",
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
        }


@dataclass
class Collection:
    idShort: str
    elements: list = field(default_factory=list)

    def __post_init__(self):
        _check_id_short(self.idShort)
        _check_unique(self.elements)

    def to_json_dict(self) -> dict:
        return {
            "idShort": self.idShort,
            "kind": "Collection",
            "elements": [el.to_json_dict() for el in self.elements],
        }

    def find(self, id_short: str):
        for el in self.elements:
            if el.idShort == id_short:
                return el
        return None


Element = Property | Operation | Collection


@dataclass
class Submodel:
    idShort: str
    elements: list = field(default_factory=list)

    def __post_init__(self):
        _check_id_short(self.idShort)
        _check_unique(self.elements)

    def to_json_dict(self) -> dict:
        return {
            "idShort": self.idShort,
            "elements": [el.to_json_dict() for el in self.elements],
        }

    def find(self, id_short: str):
        for el in self.elements:
            if el.idShort == id_short:
                return el
        return None


@dataclass
class Shell:
    id: str
    assetKind: str
    submodels: list = field(default_factory=list)

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id):
            raise BadRequest(f"invalid shell id {self.id!r}")
        if self.assetKind not in ASSET_KINDS:
            raise BadRequest(f"unknown assetKind {self.assetKind!r}")
        _check_unique(self.submodels)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "assetKind": self.assetKind,
            "submodels": [sm.to_json_dict() for sm in self.submodels],
        }

    def submodel(self, id_short: str):
        for sm in self.submodels:
            if sm.idShort == id_short:
                return sm
        return None


def serialize_shell(shell: Shell) -> str:
    """Canonical JSON text: fixed key order, no extra whitespace."""
    return json.dumps(shell.to_json_dict(), separators=(",", ":"))


def element_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "Property":
        return Property(doc["idShort"], doc["valueType"], doc["value"])
    if kind == "Operation":
        return Operation(doc["idShort"], list(doc.get("inputs", [])), list(doc.get("outputs", [])))
    if kind == "Collection":
        return Collection(doc["idShort"], [element_from_json(e) for e in doc.get("elements", [])])
    raise BadRequest(f"unknown element kind {kind!r}")


def submodel_from_json(doc: dict) -> Submodel:
    return Submodel(doc["idShort"], [element_from_json(e) for e in doc.get("elements", [])])


def shell_from_json(doc: dict) -> Shell:
    try:
        return Shell(
            doc["id"],
            doc["assetKind"],
            [submodel_from_json(sm) for sm in doc.get("submodels", [])],
        )
    except KeyError as exc:
        raise BadRequest(f"missing field {exc}") from exc


def deserialize_shell(text: str) -> Shell:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadRequest(f"invalid JSON: {exc}") from exc
    return shell_from_json(doc)
