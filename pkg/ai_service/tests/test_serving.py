"""Serving: model cache, request handling, protocol integration."""

import base64
import json

import numpy as np
import pytest

from ai_service.preprocess import parse_ppm
from ai_service.serve import InspectionService, ModelCache, ModelMissing, batch_predict


def encode_ppm_b64(pixels):
    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode()
    return base64.b64encode(header + pixels.astype(np.uint8).tobytes()).decode()


def load_pixels(dataset_dir, pid, side):
    return parse_ppm((dataset_dir / f"{pid}.{side}.ppm").read_bytes())


def request_for(dataset_dir, pid, side):
    blob = base64.b64encode((dataset_dir / f"{pid}.{side}.ppm").read_bytes()).decode()
    return {"position": side, "images": {side: blob}}


def truth_of(dataset_dir, pid):
    return json.loads((dataset_dir / f"{pid}.truth.json").read_text())


@pytest.fixture
def service(models_dir):
    out, _ = models_dir
    return InspectionService(out)


class TestModelCache:
    def test_missing_models_detected_at_startup(self, tmp_path):
        with pytest.raises(ModelMissing):
            InspectionService(tmp_path)

    def test_each_model_loaded_once_over_ten_requests(self, service, dataset_dir):
        for i in range(10):
            pid = f"{(i % 5) + 1:04d}"
            side = "left" if i % 2 == 0 else "right"
            service.handle(request_for(dataset_dir, pid, side))
        assert service.cache.load_counts == {"scratch": 1, "engraving": 1, "windows": 1}
        assert sum(service.cache.load_counts.values()) == 3

    def test_lazy_loading(self, models_dir, dataset_dir):
        out, _ = models_dir
        service = InspectionService(out)
        assert sum(service.cache.load_counts.values()) == 0
        service.handle(request_for(dataset_dir, "0001", "right"))
        # right side needs scratch + engraving, not windows
        assert service.cache.load_counts["windows"] == 0


class TestHandle:
    def test_clean_car_reply(self, service, dataset_dir):
        clean = next(
            p.name.split(".")[0]
            for p in sorted(dataset_dir.glob("*.truth.json"))
            if truth_of(dataset_dir, p.name.split(".")[0])["scratches"] == 0
        )
        reply = service.handle(request_for(dataset_dir, clean, "left"))
        findings = reply["findings"]
        assert findings["scratch"] is False
        assert reply["confidence"]["scratch"] >= 0.8
        assert findings["wheelColor"] == truth_of(dataset_dir, clean)["wheelColor"]
        assert reply["latencyMs"] >= 0

    def test_right_side_reports_engraving(self, service, dataset_dir):
        pid = next(
            p.name.split(".")[0]
            for p in sorted(dataset_dir.glob("*.truth.json"))
            if truth_of(dataset_dir, p.name.split(".")[0])["engraving"]
        )
        reply = service.handle(request_for(dataset_dir, pid, "right"))
        assert reply["findings"]["engraving"] is True
        assert "wheelColor" not in reply["findings"]

    def test_accuracy_over_dataset(self, service, dataset_dir):
        hits = {"scratch": 0, "engraving": 0, "windows": 0}
        pids = [p.name.split(".")[0] for p in sorted(dataset_dir.glob("*.truth.json"))][:60]
        for pid in pids:
            truth = truth_of(dataset_dir, pid)
            left = service.handle(request_for(dataset_dir, pid, "left"))["findings"]
            right = service.handle(request_for(dataset_dir, pid, "right"))["findings"]
            hits["scratch"] += (left["scratch"] or right["scratch"]) == (truth["scratches"] > 0)
            hits["engraving"] += right["engraving"] == truth["engraving"]
            hits["windows"] += left["windows"] == truth["windows"]
        for task, count in hits.items():
            assert count >= 0.9 * len(pids), f"{task}: {count}/{len(pids)}"

    @pytest.mark.parametrize(
        "payload",
        [
            None,
            {},
            {"position": "top", "images": {}},
            {"position": "left", "images": {}},
            {"position": "left", "images": {"left": "not!!base64"}},
            {"position": "left", "images": {"left": base64.b64encode(b"P5 junk").decode()}},
        ],
    )
    def test_malformed_requests_raise(self, service, payload):
        from ai_service.preprocess import MalformedImage

        with pytest.raises(MalformedImage):
            service.handle(payload)

    def test_serving_equals_batch_predict(self, service, dataset_dir):
        pixels = [load_pixels(dataset_dir, f"{i:04d}", "left") for i in (1, 2, 3)]
        batch = batch_predict(service.cache, "windows", pixels)
        for px, probs in zip(pixels, batch):
            reply = service.handle({"position": "left", "images": {"left": encode_ppm_b64(px)}})
            assert reply["findings"]["windows"] == int(np.argmax(probs)) + 1


class TestProtocolIntegration:
    def test_full_stack_over_external_service_protocol(self, models_dir, dataset_dir):
        """Spawn the real service as a subprocess and drive it through the
        platform's host-side handle, including an error frame mid-stream."""
        import sys

        from flowplant.runtime.polyglot import ServiceCallError, spawn

        out, _ = models_dir
        command = f"{sys.executable} -m ai_service.serve --models {out}"
        handle = spawn("ai", command, startup_timeout_s=60)
        try:
            reply = handle.request(request_for(dataset_dir, "0001", "left"), timeout_s=60)
            assert set(reply) == {"findings", "confidence", "latencyMs"}
            assert reply["findings"]["windows"] in (1, 2, 3)
            with pytest.raises(ServiceCallError):
                handle.request({"position": "left", "images": {"left": "@@@"}}, timeout_s=30)
            # the service survives the bad request
            again = handle.request(request_for(dataset_dir, "0002", "right"), timeout_s=60)
            assert "engraving" in again["findings"]
        finally:
            handle.shutdown(timeout_s=10)

    def test_platform_analyzer_contract(self, models_dir, dataset_dir):
        """The reply satisfies the platform's analyzer expectations."""
        out, _ = models_dir
        service = InspectionService(out)

        class DirectHandle:
            def request(self, payload, timeout_s=None):
                return service.handle(payload)

        from flowplant.app.decider import PolyglotAnalyzer
        from flowplant.vision.image import read_ppm

        analyzer = PolyglotAnalyzer(DirectHandle())
        frame = read_ppm(dataset_dir / "0001.left.ppm")
        findings = analyzer.analyze("left", frame)
        assert {"scratch", "windows", "wheelColor"} <= set(findings)
