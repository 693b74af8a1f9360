"""Preprocessing: PPM parsing, masks, and consistency with the generator."""

import json

import numpy as np
import pytest

from ai_service.preprocess import (
    CANVAS,
    ENGRAVING_ROI,
    INPUT_SIZE,
    MalformedImage,
    TASKS,
    classify_wheel_color,
    edge_bits,
    parse_ppm,
    preprocess,
    suppression_mask,
    window_mask_pair,
)


def encode_ppm(pixels):
    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode()
    return header + pixels.astype(np.uint8).tobytes()


def load_sample(dataset_dir, pid, side):
    pixels = parse_ppm((dataset_dir / f"{pid}.{side}.ppm").read_bytes())
    truth = json.loads((dataset_dir / f"{pid}.truth.json").read_text())
    return pixels, truth


def find_pid(dataset_dir, predicate):
    for path in sorted(dataset_dir.glob("*.truth.json")):
        truth = json.loads(path.read_text())
        if predicate(truth):
            return truth["productId"]
    raise AssertionError("no matching sample in dataset")


class TestPpmParsing:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        pixels = rng.integers(0, 256, size=(8, 6, 3), dtype=np.uint8)
        assert np.array_equal(parse_ppm(encode_ppm(pixels)), pixels)

    @pytest.mark.parametrize("data", [b"", b"P5\n2 2\n255\nxxxx", b"P6\n2 2\n65535\n" + b"\0" * 12, b"P6\n2 2\n255\nshort"])
    def test_malformed_rejected(self, data):
        with pytest.raises(MalformedImage):
            parse_ppm(data)


class TestMasks:
    def test_clean_car_scratch_mask_nearly_empty(self, dataset_dir):
        pid = find_pid(dataset_dir, lambda t: t["scratches"] == 0)
        pixels, _ = load_sample(dataset_dir, pid, "left")
        mask = suppression_mask(pixels)
        assert mask.mean() <= 0.001  # at most 0.1% of pixels set

    def test_scratched_car_mask_has_signal(self, dataset_dir):
        pid = find_pid(dataset_dir, lambda t: t["scratches"] > 0)
        pixels, truth = load_sample(dataset_dir, pid, "left")
        assert suppression_mask(pixels).sum() > 0
        assert truth["scratchPixels"] > 0

    def test_engraving_raises_rear_edge_density(self, dataset_dir):
        with_pid = find_pid(dataset_dir, lambda t: t["engraving"])
        without_pid = find_pid(dataset_dir, lambda t: not t["engraving"])
        y0, x0, y1, x1 = ENGRAVING_ROI
        densities = {}
        for pid in (with_pid, without_pid):
            pixels, _ = load_sample(dataset_dir, pid, "right")
            densities[pid] = edge_bits(pixels)[y0:y1, x0:x1].mean()
        assert densities[with_pid] > densities[without_pid] + 0.05

    def test_window_pair_second_mask_scratches_only(self, dataset_dir):
        pid = find_pid(dataset_dir, lambda t: t["scratches"] > 0 and t["windows"] >= 2)
        pixels, _ = load_sample(dataset_dir, pid, "left")
        mask1, mask2 = window_mask_pair(pixels)
        # windows are dark but body-colored nowhere: they appear in mask1 only
        assert mask1.sum() > mask2.sum()
        assert mask2.sum() > 0
        # everything in mask2 is also a dark defect candidate in mask1
        assert (mask2 & ~mask1).sum() == 0

    def test_wheel_color_matches_truth(self, dataset_dir):
        for pid in ("0001", "0002", "0003", "0004"):
            pixels, truth = load_sample(dataset_dir, pid, "left")
            assert classify_wheel_color(pixels) == truth["wheelColor"]


class TestTensors:
    @pytest.mark.parametrize("task,channels", [("scratch", 1), ("engraving", 1), ("windows", 2)])
    def test_shapes(self, dataset_dir, task, channels):
        pixels, _ = load_sample(dataset_dir, "0001", "left")
        tensor = preprocess(task, pixels)
        assert tensor.shape == (channels, INPUT_SIZE, INPUT_SIZE)
        assert tensor.dtype == np.float32
        assert 0.0 <= tensor.min() and tensor.max() <= 1.0

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            preprocess("color", np.zeros((CANVAS, CANVAS, 3), dtype=np.uint8))

    def test_wrong_canvas_rejected(self):
        with pytest.raises(MalformedImage):
            preprocess("scratch", np.zeros((64, 64, 3), dtype=np.uint8))

    def test_task_list(self):
        assert TASKS == ("scratch", "engraving", "windows")
