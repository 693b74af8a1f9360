"""Semantic validation of an AppSpec. Output is a deterministic, ordered
diagnostic list; an empty list means the spec is valid."""

from __future__ import annotations

from dataclasses import dataclass

from ..transport import BACKENDS
from .model import AppSpec, DEPLOY_TARGETS, PRIMITIVES, SERVICE_KINDS


@dataclass(frozen=True)
class Diagnostic:
    code: str
    location: str  # "service:<name>", "edge:<n>", "type:<name>", "app"
    message: str

    def __str__(self):
        return f"{self.code} at {self.location}: {self.message}"


def _type_cycles(spec: AppSpec) -> list[str]:
    graph = {t.name: [ft for _, ft in t.fields if ft not in PRIMITIVES] for t in spec.types}
    state: dict[str, int] = {}
    cyclic = []

    def visit(node, stack):
        state[node] = 1
        for ref in graph.get(node, ()):
            if ref not in graph:
                continue
            if state.get(ref) == 1:
                cyclic.append("->".join(stack + [ref]))
            elif state.get(ref) is None:
                visit(ref, stack + [ref])
        state[node] = 2

    for name in graph:
        if state.get(name) is None:
            visit(name, [name])
    return cyclic


def _service_cycle(spec: AppSpec) -> list[str] | None:
    """Returns one service-graph cycle as a name list, or None."""
    adjacency: dict[str, set[str]] = {s.name: set() for s in spec.services}
    for edge in spec.edges:
        if edge.from_service in adjacency and edge.to_service in adjacency:
            adjacency[edge.from_service].add(edge.to_service)
    state: dict[str, int] = {}
    found: list[str] = []

    def visit(node, stack):
        if found:
            return
        state[node] = 1
        for nxt in sorted(adjacency[node]):
            if state.get(nxt) == 1:
                found.extend(stack[stack.index(nxt) :] + [nxt])
                return
            if state.get(nxt) is None:
                visit(nxt, stack + [nxt])
        state[node] = 2

    for name in sorted(adjacency):
        if state.get(name) is None and not found:
            visit(name, [name])
    return found or None


def validate(spec: AppSpec) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    type_names = [t.name for t in spec.types]
    known_types = set(type_names) | set(PRIMITIVES)

    # app-level
    if spec.transport not in BACKENDS:
        diags.append(
            Diagnostic(
                "UnknownTransport", "app", f"transport backend {spec.transport!r}; known: {BACKENDS}"
            )
        )
    dupes = {n for n in type_names if type_names.count(n) > 1}
    for name in sorted(dupes):
        diags.append(Diagnostic("DuplicateType", f"type:{name}", "type name declared twice"))
    for cycle in _type_cycles(spec):
        diags.append(Diagnostic("RecursiveType", "app", f"type reference cycle {cycle}"))
    for t in sorted(spec.types, key=lambda t: t.name):
        field_names = [fn for fn, _ in t.fields]
        for fn in sorted({n for n in field_names if field_names.count(n) > 1}):
            diags.append(Diagnostic("DuplicateField", f"type:{t.name}", f"field {fn!r} declared twice"))
        for fn, ft in t.fields:
            if ft not in known_types:
                diags.append(Diagnostic("UnknownType", f"type:{t.name}", f"field {fn!r} has unknown type {ft!r}"))

    # services, ordered by name
    service_names = [s.name for s in spec.services]
    for name in sorted({n for n in service_names if service_names.count(n) > 1}):
        diags.append(Diagnostic("DuplicateService", f"service:{name}", "service name declared twice"))
    for svc in sorted(spec.services, key=lambda s: s.name):
        loc = f"service:{svc.name}"
        if svc.kind not in SERVICE_KINDS:
            diags.append(Diagnostic("UnknownKind", loc, f"kind {svc.kind!r}; known: {SERVICE_KINDS}"))
        if svc.impl_kind not in ("builtin", "external") or not svc.impl_ref:
            diags.append(Diagnostic("BadImpl", loc, f"impl must be builtin:<id> or external:<command>, got {svc.impl!r}"))
        if svc.kind == "source" and svc.inputs:
            diags.append(Diagnostic("SourceHasInputs", loc, "a source service takes no inputs"))
        if svc.kind == "sink" and svc.outputs:
            diags.append(Diagnostic("SinkHasOutputs", loc, "a sink service produces no outputs"))
        if svc.resources.ram_mb < 0 or svc.resources.disk_mb < 0:
            diags.append(Diagnostic("NegativeResources", loc, "resource claims must be >= 0"))
        if svc.deployable_to not in DEPLOY_TARGETS:
            diags.append(Diagnostic("BadDeployTarget", loc, f"deployableTo {svc.deployable_to!r}; known: {DEPLOY_TARGETS}"))
        for port, type_name in list(svc.inputs) + list(svc.outputs):
            if type_name not in known_types:
                diags.append(Diagnostic("UnknownType", loc, f"port {port!r} has unknown type {type_name!r}"))

    # edges, in declaration order
    seen_outputs: dict[tuple[str, str], int] = {}
    for index, edge in enumerate(spec.edges):
        loc = f"edge:{index}"
        src = spec.service(edge.from_service)
        dst = spec.service(edge.to_service)
        if src is None:
            diags.append(Diagnostic("DanglingEndpoint", loc, f"unknown service {edge.from_service!r}"))
        if dst is None:
            diags.append(Diagnostic("DanglingEndpoint", loc, f"unknown service {edge.to_service!r}"))
        out_type = dict(src.outputs).get(edge.from_output) if src else None
        in_type = dict(dst.inputs).get(edge.to_input) if dst else None
        if src is not None and out_type is None:
            diags.append(Diagnostic("DanglingEndpoint", loc, f"{edge.from_service!r} has no output {edge.from_output!r}"))
        if dst is not None and in_type is None:
            diags.append(Diagnostic("DanglingEndpoint", loc, f"{edge.to_service!r} has no input {edge.to_input!r}"))
        if out_type is not None and in_type is not None and out_type != in_type:
            diags.append(
                Diagnostic("TypeMismatch", loc, f"{out_type!r} flows into {in_type!r} ({edge.label()})")
            )
        key = (edge.from_service, edge.from_output)
        if key in seen_outputs:
            diags.append(
                Diagnostic(
                    "TopicCollision",
                    loc,
                    f"output {edge.from_service}.{edge.from_output} already wired by edge {seen_outputs[key]}",
                )
            )
        else:
            seen_outputs[key] = index

    # graph shape (only meaningful when endpoints resolved)
    if not any(d.code == "DanglingEndpoint" for d in diags):
        cycle = _service_cycle(spec)
        if cycle:
            diags.append(Diagnostic("CycleDetected", "app", "->".join(cycle)))
        sources = [s.name for s in spec.services if s.kind == "source"]
        sinks = {s.name for s in spec.services if s.kind == "sink"}
        if not sources or not sinks:
            diags.append(Diagnostic("NoSourceToSink", "app", "need at least one source and one sink"))
        else:
            adjacency: dict[str, set[str]] = {s.name: set() for s in spec.services}
            for edge in spec.edges:
                adjacency[edge.from_service].add(edge.to_service)
            reachable = set()
            frontier = list(sources)
            while frontier:
                node = frontier.pop()
                if node in reachable:
                    continue
                reachable.add(node)
                frontier.extend(adjacency.get(node, ()))
            if not (reachable & sinks):
                diags.append(Diagnostic("NoSourceToSink", "app", "no sink reachable from any source"))
    return diags
