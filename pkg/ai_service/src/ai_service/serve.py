"""Serving: answer per-side analysis requests over the platform's
external-service protocol, with a lazy one-load-per-task model cache."""

from __future__ import annotations

import argparse
import base64
import os
import threading
import time
from pathlib import Path

import numpy as np
import torch

from .model import build_model
from .preprocess import MalformedImage, classify_wheel_color, parse_ppm, preprocess

POSITION_TASKS = {"left": ("scratch", "windows"), "right": ("scratch", "engraving")}


class ModelMissing(Exception):
    pass


class ModelCache:
    """Loads each task model at most once; load_counts is the regression
    oracle for streaming setups that must not reload per request."""

    def __init__(self, models_dir):
        self.models_dir = Path(models_dir)
        self._lock = threading.Lock()
        self._models = {}
        self.load_counts = {"scratch": 0, "engraving": 0, "windows": 0}

    def path(self, task: str) -> Path:
        return self.models_dir / task / "model.pt"

    def verify(self) -> None:
        missing = [task for task in self.load_counts if not self.path(task).is_file()]
        if missing:
            raise ModelMissing(f"missing model weights for: {', '.join(missing)}")

    def get(self, task: str):
        with self._lock:
            model = self._models.get(task)
            if model is None:
                if not self.path(task).is_file():
                    raise ModelMissing(f"missing model weights for: {task}")
                model = build_model(task)
                model.load_state_dict(torch.load(self.path(task), weights_only=True))
                model.eval()
                self._models[task] = model
                self.load_counts[task] += 1
            return model


def batch_predict(cache: ModelCache, task: str, pixels_list) -> list:
    """Offline prediction path; serving must agree with this for the same
    model and inputs."""
    model = cache.get(task)
    inputs = torch.from_numpy(
        np.stack([preprocess(task, p) for p in pixels_list]).astype(np.float32)
    )
    return model.predict(inputs).tolist()


class InspectionService:
    def __init__(self, models_dir):
        self.cache = ModelCache(models_dir)
        self.cache.verify()

    def _predict(self, task: str, pixels) -> tuple[object, float]:
        """Returns (finding value, confidence) for one task on one image."""
        model = self.cache.get(task)
        tensor = torch.from_numpy(preprocess(task, pixels)[None].astype("float32"))
        probs = model.predict(tensor)[0]
        if task == "windows":
            index = int(probs.argmax())
            return index + 1, float(probs[index])
        p = float(probs[0])
        return p >= 0.5, max(p, 1.0 - p)

    def handle(self, payload) -> dict:
        started = time.perf_counter()
        if not isinstance(payload, dict):
            raise MalformedImage("request payload must be an object")
        position = payload.get("position")
        if position not in POSITION_TASKS:
            raise MalformedImage(f"unknown position {position!r}")
        images = payload.get("images") or {}
        blob = images.get(position)
        if not isinstance(blob, str):
            raise MalformedImage(f"no image for position {position!r}")
        try:
            pixels = parse_ppm(base64.b64decode(blob, validate=True))
        except Exception as exc:  # noqa: BLE001 - bad base64 or bad PPM
            raise MalformedImage(f"undecodable image: {exc}") from exc

        findings = {}
        confidence = {}
        for task in POSITION_TASKS[position]:
            value, conf = self._predict(task, pixels)
            findings[task] = value
            confidence[task] = round(conf, 4)
        if position == "left":
            findings["wheelColor"] = classify_wheel_color(pixels)
        latency_ms = (time.perf_counter() - started) * 1000.0
        return {"findings": findings, "confidence": confidence, "latencyMs": round(latency_ms, 3)}


def main(argv=None) -> int:
    from flowplant.runtime.polyglot import PolyglotWorker

    parser = argparse.ArgumentParser(description="serve the inspection models")
    parser.add_argument("--models", default=os.environ.get("AI_MODELS_DIR", "models"))
    args = parser.parse_args(argv)
    service = InspectionService(args.models)
    PolyglotWorker(service.handle).run()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
