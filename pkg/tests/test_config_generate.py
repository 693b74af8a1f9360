"""Artifact generation: topics, descriptors, byte-identical reruns."""

import json

import pytest

from flowplant.configmodel.generate import InvalidSpec, edge_topic, instantiate
from flowplant.configmodel.model import load_app_spec
from flowplant.configmodel.validate import validate


@pytest.fixture(scope="module")
def fig_spec():
    import pathlib

    return load_app_spec(pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "app.yaml")


def test_topic_naming(fig_spec):
    edge = fig_spec.edges[0]
    assert edge_topic(fig_spec, edge) == "quality-inspection/cam_source/frames"


def test_topics_unique_for_valid_spec(fig_spec):
    assert validate(fig_spec) == []
    topics = [edge_topic(fig_spec, e) for e in fig_spec.edges]
    assert len(set(topics)) == len(topics)


def test_instantiate_writes_expected_files(fig_spec, tmp_path):
    artifacts = instantiate(fig_spec, tmp_path)
    assert artifacts.wiring_path.name == "wiring.json"
    assert len(artifacts.interface_paths) == len(fig_spec.services)
    assert len(artifacts.harness_paths) == len(fig_spec.services)
    for path in artifacts.all_paths:
        assert path.exists()


def test_wiring_contents(fig_spec, tmp_path):
    artifacts = instantiate(fig_spec, tmp_path)
    wiring = json.loads(artifacts.wiring_path.read_text())
    assert wiring["app"] == "quality-inspection"
    assert len(wiring["edges"]) == 7
    by_from = {e["from"]: e for e in wiring["edges"]}
    assert by_from["cam_source.frames"]["topic"] == "quality-inspection/cam_source/frames"
    assert by_from["cam_source.frames"]["to"] == "ai.frames"


def test_interface_descriptor_shape(fig_spec, tmp_path):
    artifacts = instantiate(fig_spec, tmp_path)
    docs = {json.loads(p.read_text())["service"]: json.loads(p.read_text()) for p in artifacts.interface_paths}
    decider = docs["action_decider"]
    assert decider["inputs"]["detections"]["wheelColor"] == "string"
    assert decider["management"] == ["start", "stop", "status"]
    assert "polyglot" not in decider
    ai = docs["ai"]
    assert ai["polyglot"]["protocolVersion"] == 1
    assert ai["polyglot"]["portEnv"] == "PLAT_SVC_PORT"
    assert ai["polyglot"]["serviceIdEnv"] == "PLAT_SVC_ID"
    assert ai["polyglot"]["framing"] == "len32be+json"


def test_harness_samples_match_types(fig_spec, tmp_path):
    artifacts = instantiate(fig_spec, tmp_path)
    harness = json.loads((tmp_path / "tests" / "ai.harness.json").read_text())
    sample = harness["sampleInputs"]["frames"]
    assert sample == {"data": "", "position": "sample", "productHint": "sample"}
    assert harness["expectedOutputs"] is None


def test_byte_identical_reruns(fig_spec, tmp_path):
    first_dir = tmp_path / "a"
    second_dir = tmp_path / "b"
    first = instantiate(fig_spec, first_dir)
    second = instantiate(fig_spec, second_dir)
    for pa, pb in zip(first.all_paths, second.all_paths):
        assert pa.read_bytes() == pb.read_bytes()
    # and rerunning in place leaves the bytes untouched
    again = instantiate(fig_spec, first_dir)
    for pa, pb in zip(first.all_paths, again.all_paths):
        assert pa.read_bytes() == pb.read_bytes()


def test_invalid_spec_refused(fig_spec, tmp_path):
    from flowplant.configmodel.model import AppSpec

    bad = AppSpec(name="x", transport="mqtt")
    with pytest.raises(InvalidSpec) as err:
        instantiate(bad, tmp_path)
    assert any(d.code == "UnknownTransport" for d in err.value.diagnostics)
