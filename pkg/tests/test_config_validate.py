"""Spec validation: every diagnostic code, and deterministic ordering."""

import pytest

from flowplant.configmodel.model import (
    AppSpec,
    DataTypeDef,
    FlowEdge,
    Resources,
    ServiceDef,
    SpecFormatError,
    app_spec_from_dict,
    load_app_spec,
)
from flowplant.configmodel.validate import validate


def svc(name, kind="processor", impl="builtin:x", inputs=(), outputs=(), res=None, target="any"):
    return ServiceDef(
        name=name,
        kind=kind,
        impl=impl,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        resources=res or Resources(),
        deployable_to=target,
    )


def minimal_spec(**overrides):
    base = dict(
        name="app",
        transport="in_memory",
        types=(DataTypeDef("Msg", (("x", "int"),)),),
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Msg")]),
        ),
        edges=(FlowEdge("src", "out", "dst", "in"),),
    )
    base.update(overrides)
    return AppSpec(**base)


def codes(spec):
    return [d.code for d in validate(spec)]


def test_valid_spec_is_clean():
    assert validate(minimal_spec()) == []


def test_fixture_is_clean(fixtures_dir):
    assert validate(load_app_spec(fixtures_dir / "app.yaml")) == []


def test_unknown_transport():
    assert "UnknownTransport" in codes(minimal_spec(transport="mqtt"))


def test_duplicate_type():
    spec = minimal_spec(types=(DataTypeDef("Msg", (("x", "int"),)), DataTypeDef("Msg", ())))
    assert "DuplicateType" in codes(spec)


def test_recursive_type():
    spec = minimal_spec(
        types=(
            DataTypeDef("A", (("b", "B"),)),
            DataTypeDef("B", (("a", "A"),)),
            DataTypeDef("Msg", (("x", "int"),)),
        )
    )
    assert "RecursiveType" in codes(spec)


def test_duplicate_field_and_unknown_type_in_type():
    spec = minimal_spec(
        types=(
            DataTypeDef("Msg", (("x", "int"), ("x", "string"), ("y", "Ghost"))),
        )
    )
    found = codes(spec)
    assert "DuplicateField" in found
    assert "UnknownType" in found


def test_duplicate_service():
    spec = minimal_spec(
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Msg")]),
        )
    )
    assert "DuplicateService" in codes(spec)


def test_service_shape_diagnostics():
    spec = minimal_spec(
        services=(
            svc("a", kind="pump"),
            svc("b", impl="weird"),
            svc("c", kind="source", inputs=[("in", "Msg")], outputs=[("out", "Msg")]),
            svc("d", kind="sink", inputs=[("in", "Msg")], outputs=[("out", "Msg")]),
            svc("e", res=Resources(ram_mb=-1)),
            svc("f", target="cloud"),
            svc("g", inputs=[("in", "Ghost")]),
        ),
        edges=(),
    )
    found = codes(spec)
    for code in (
        "UnknownKind",
        "BadImpl",
        "SourceHasInputs",
        "SinkHasOutputs",
        "NegativeResources",
        "BadDeployTarget",
        "UnknownType",
        "NoSourceToSink",
    ):
        assert code in found, code


def test_dangling_edges():
    spec = minimal_spec(
        edges=(
            FlowEdge("ghost", "out", "dst", "in"),
            FlowEdge("src", "nope", "dst", "in"),
            FlowEdge("src", "out", "dst", "nope"),
        )
    )
    assert codes(spec).count("DanglingEndpoint") == 3


def test_edge_type_mismatch():
    spec = minimal_spec(
        types=(DataTypeDef("Msg", (("x", "int"),)), DataTypeDef("Other", ())),
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Other")]),
        ),
    )
    assert "TypeMismatch" in codes(spec)


def test_topic_collision_on_double_wired_output():
    spec = minimal_spec(
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Msg")]),
            svc("dst2", kind="sink", inputs=[("in", "Msg")]),
        ),
        edges=(
            FlowEdge("src", "out", "dst", "in"),
            FlowEdge("src", "out", "dst2", "in"),
        ),
    )
    assert "TopicCollision" in codes(spec)


def test_cycle_detected():
    spec = minimal_spec(
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("a", inputs=[("in", "Msg")], outputs=[("out", "Msg")]),
            svc("b", inputs=[("in", "Msg"), ("in2", "Msg")], outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Msg")]),
        ),
        edges=(
            FlowEdge("src", "out", "b", "in2"),
            FlowEdge("a", "out", "b", "in"),
            FlowEdge("b", "out", "a", "in"),
            FlowEdge("a", "out", "dst", "in"),
        ),
    )
    found = codes(spec)
    assert "CycleDetected" in found


def test_unreachable_sink():
    spec = minimal_spec(
        services=(
            svc("src", kind="source", outputs=[("out", "Msg")]),
            svc("mid", inputs=[("in", "Msg")], outputs=[("out", "Msg")]),
            svc("dst", kind="sink", inputs=[("in", "Msg")]),
        ),
        edges=(FlowEdge("src", "out", "mid", "in"),),
    )
    assert "NoSourceToSink" in codes(spec)


def test_diagnostics_are_deterministic():
    spec = minimal_spec(
        transport="mqtt",
        services=(
            svc("z", kind="pump"),
            svc("a", kind="pump"),
        ),
        edges=(),
    )
    first = validate(spec)
    second = validate(spec)
    assert first == second
    service_locs = [d.location for d in first if d.location.startswith("service:")]
    assert service_locs == sorted(service_locs)


def test_graph_checks_suppressed_while_dangling():
    spec = minimal_spec(edges=(FlowEdge("ghost", "out", "dst", "in"),))
    found = codes(spec)
    assert "DanglingEndpoint" in found
    assert "NoSourceToSink" not in found
    assert "CycleDetected" not in found


def test_loader_rejects_malformed_documents():
    with pytest.raises(SpecFormatError):
        app_spec_from_dict(["not", "a", "mapping"])
    with pytest.raises(SpecFormatError):
        app_spec_from_dict({"transport": "in_memory"})
    with pytest.raises(SpecFormatError):
        app_spec_from_dict({"name": "x", "edges": [{"from": "noport", "to": "a.b"}]})
