"""Declarative application model: data types, services, flow edges, devices.

Loaded from YAML (`app.yaml`, `devices.yaml`); see docs/ for the schemas.
Instances are immutable; validation lives in `validate`, generation in
`generate`, placement in `plan`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

PRIMITIVES = ("string", "int", "double", "bool", "bytes")
SERVICE_KINDS = ("source", "processor", "sink", "connector")
DEPLOY_TARGETS = ("server", "edge", "any")
DEVICE_KINDS = ("server", "edge")


class SpecFormatError(ValueError):
    """Structurally unreadable spec file (vs. semantic diagnostics)."""


@dataclass(frozen=True)
class DataTypeDef:
    name: str
    fields: tuple  # of (field_name, type_name) pairs; type_name is primitive or another DataTypeDef name


@dataclass(frozen=True)
class Resources:
    ram_mb: int = 0
    disk_mb: int = 0


@dataclass(frozen=True)
class ServiceDef:
    name: str
    kind: str
    impl: str  # "builtin:<id>" or "external:<command>"
    inputs: tuple = field(default_factory=tuple)  # (port, type_name) pairs
    outputs: tuple = field(default_factory=tuple)
    resources: Resources = field(default_factory=Resources)
    deployable_to: str = "any"

    @property
    def impl_kind(self) -> str:
        return self.impl.split(":", 1)[0]

    @property
    def impl_ref(self) -> str:
        return self.impl.split(":", 1)[1] if ":" in self.impl else ""


@dataclass(frozen=True)
class FlowEdge:
    from_service: str
    from_output: str
    to_service: str
    to_input: str

    def label(self) -> str:
        return f"{self.from_service}.{self.from_output}->{self.to_service}.{self.to_input}"


@dataclass(frozen=True)
class AppSpec:
    name: str
    transport: str
    types: tuple = field(default_factory=tuple)
    services: tuple = field(default_factory=tuple)
    edges: tuple = field(default_factory=tuple)
    options: dict = field(default_factory=dict)

    def service(self, name: str):
        return next((s for s in self.services if s.name == name), None)

    def type_def(self, name: str):
        return next((t for t in self.types if t.name == name), None)


@dataclass(frozen=True)
class DeviceDef:
    name: str
    kind: str
    ram_mb: int
    disk_mb: int
    cpu_class: str = "generic"

    def __post_init__(self):
        if self.kind not in DEVICE_KINDS:
            raise SpecFormatError(f"device {self.name!r}: unknown kind {self.kind!r}")
        if self.ram_mb <= 0 or self.disk_mb <= 0:
            raise SpecFormatError(f"device {self.name!r}: capacities must be positive")


@dataclass(frozen=True)
class DeploymentPlan:
    assignments: dict  # service name -> device name
    residuals: dict  # device name -> Resources


def _pairs(mapping, context: str) -> tuple:
    if mapping is None:
        return ()
    if not isinstance(mapping, dict):
        raise SpecFormatError(f"{context}: expected a mapping")
    return tuple((str(k), str(v)) for k, v in mapping.items())


def _parse_endpoint(text: str, context: str) -> tuple[str, str]:
    if not isinstance(text, str) or text.count(".") != 1:
        raise SpecFormatError(f"{context}: endpoint must look like 'service.port', got {text!r}")
    svc, port = text.split(".")
    return svc, port


def app_spec_from_dict(doc: dict) -> AppSpec:
    if not isinstance(doc, dict):
        raise SpecFormatError("app spec must be a mapping")
    try:
        name = str(doc["name"])
    except KeyError:
        raise SpecFormatError("app spec needs a 'name'") from None
    types = []
    for td in doc.get("types") or []:
        fields = []
        for f in td.get("fields") or []:
            fields.append((str(f["name"]), str(f["type"])))
        types.append(DataTypeDef(name=str(td["name"]), fields=tuple(fields)))
    services = []
    for sd in doc.get("services") or []:
        res = sd.get("resources") or {}
        services.append(
            ServiceDef(
                name=str(sd["name"]),
                kind=str(sd.get("kind", "")),
                impl=str(sd.get("impl", "")),
                inputs=_pairs(sd.get("inputs"), f"service {sd.get('name')}: inputs"),
                outputs=_pairs(sd.get("outputs"), f"service {sd.get('name')}: outputs"),
                resources=Resources(int(res.get("ramMb", 0)), int(res.get("diskMb", 0))),
                deployable_to=str(sd.get("deployableTo", "any")),
            )
        )
    edges = []
    for i, ed in enumerate(doc.get("edges") or []):
        f_svc, f_port = _parse_endpoint(ed.get("from"), f"edge {i}: from")
        t_svc, t_port = _parse_endpoint(ed.get("to"), f"edge {i}: to")
        edges.append(FlowEdge(f_svc, f_port, t_svc, t_port))
    return AppSpec(
        name=name,
        transport=str(doc.get("transport", "in_memory")),
        types=tuple(types),
        services=tuple(services),
        edges=tuple(edges),
        options=dict(doc.get("options") or {}),
    )


def load_app_spec(path) -> AppSpec:
    return app_spec_from_dict(yaml.safe_load(Path(path).read_text()))


def load_devices(path) -> list[DeviceDef]:
    doc = yaml.safe_load(Path(path).read_text())
    entries = doc.get("devices") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise SpecFormatError("devices file must hold a 'devices' list")
    return [
        DeviceDef(
            name=str(d["name"]),
            kind=str(d["kind"]),
            ram_mb=int(d["ramMb"]),
            disk_mb=int(d["diskMb"]),
            cpu_class=str(d.get("cpuClass", "generic")),
        )
        for d in entries
    ]
