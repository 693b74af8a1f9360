"""Instantiation artifacts: wiring manifest, interface descriptors, test harnesses.

All outputs are declarative JSON, byte-identical across runs for the same
spec: sorted keys, two-space indent, trailing newline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import AppSpec, PRIMITIVES
from .validate import validate


class InvalidSpec(Exception):
    def __init__(self, diagnostics):
        super().__init__(f"{len(diagnostics)} diagnostic(s): " + "; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class GeneratedArtifacts:
    wiring_path: Path
    interface_paths: list
    harness_paths: list

    @property
    def all_paths(self):
        return [self.wiring_path, *self.interface_paths, *self.harness_paths]


def edge_topic(spec: AppSpec, edge) -> str:
    return f"{spec.name}/{edge.from_service}/{edge.from_output}"


_SAMPLES = {"string": "sample", "int": 1, "double": 1.0, "bool": True, "bytes": ""}


def _type_schema(spec: AppSpec, type_name: str):
    if type_name in PRIMITIVES:
        return type_name
    td = spec.type_def(type_name)
    return {fn: _type_schema(spec, ft) for fn, ft in td.fields}


def _sample_value(spec: AppSpec, type_name: str):
    if type_name in PRIMITIVES:
        return _SAMPLES[type_name]
    td = spec.type_def(type_name)
    return {fn: _sample_value(spec, ft) for fn, ft in td.fields}


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def instantiate(spec: AppSpec, out_dir) -> GeneratedArtifacts:
    diagnostics = validate(spec)
    if diagnostics:
        raise InvalidSpec(diagnostics)
    out = Path(out_dir)
    (out / "services").mkdir(parents=True, exist_ok=True)
    (out / "tests").mkdir(parents=True, exist_ok=True)

    wiring = {
        "app": spec.name,
        "transport": spec.transport,
        "edges": [
            {
                "from": f"{e.from_service}.{e.from_output}",
                "to": f"{e.to_service}.{e.to_input}",
                "topic": edge_topic(spec, e),
            }
            for e in spec.edges
        ],
    }
    wiring_path = out / "wiring.json"
    _dump(wiring_path, wiring)

    interface_paths = []
    harness_paths = []
    for svc in spec.services:
        descriptor = {
            "service": svc.name,
            "kind": svc.kind,
            "impl": svc.impl,
            "deployableTo": svc.deployable_to,
            "resources": {"ramMb": svc.resources.ram_mb, "diskMb": svc.resources.disk_mb},
            "inputs": {port: _type_schema(spec, t) for port, t in svc.inputs},
            "outputs": {port: _type_schema(spec, t) for port, t in svc.outputs},
            "management": ["start", "stop", "status"],
        }
        if svc.impl_kind == "external":
            descriptor["polyglot"] = {
                "protocolVersion": 1,
                "command": svc.impl_ref,
                "portEnv": "PLAT_SVC_PORT",
                "serviceIdEnv": "PLAT_SVC_ID",
                "framing": "len32be+json",
            }
        iface_path = out / "services" / f"{svc.name}.iface.json"
        _dump(iface_path, descriptor)
        interface_paths.append(iface_path)

        harness = {
            "service": svc.name,
            "sampleInputs": {port: _sample_value(spec, t) for port, t in svc.inputs},
            "expectedOutputs": None,  # filled in by the service author
            "feed": {"topicPrefix": f"{spec.name}/", "order": [port for port, _ in svc.inputs]},
        }
        harness_path = out / "tests" / f"{svc.name}.harness.json"
        _dump(harness_path, harness)
        harness_paths.append(harness_path)

    return GeneratedArtifacts(wiring_path, interface_paths, harness_paths)
