"""Dataset loading and the deterministic train/test split."""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np

from .preprocess import parse_ppm, preprocess

TASK_SIDE = {"scratch": "left", "engraving": "right", "windows": "left"}

MIN_SAMPLES = 40


class DatasetTooSmall(Exception):
    pass


def _label(task: str, truth: dict):
    if task == "scratch":
        return float(truth["scratches"] > 0)
    if task == "engraving":
        return float(truth["engraving"])
    if task == "windows":
        return int(truth["windows"]) - 1  # classes 0..2 for 1..3 windows
    raise ValueError(f"unknown task {task!r}")


def list_samples(dataset_dir, include_augmented: bool = False) -> list[str]:
    """Sample stems (productId, plus augmented variants when requested)."""
    root = Path(dataset_dir)
    stems = sorted(
        p.name[: -len(".truth.json")]
        for p in root.glob("*.truth.json")
        if include_augmented or ".aug-" not in p.name
    )
    return stems


def load_task_dataset(task: str, dataset_dir, include_augmented: bool = False):
    """Returns (inputs, labels) numpy arrays for one task.

    Augmented variants only exist for the left view, so they are skipped for
    right-side tasks.
    """
    root = Path(dataset_dir)
    side = TASK_SIDE[task]
    inputs, labels = [], []
    for stem in list_samples(dataset_dir, include_augmented):
        image_path = root / f"{stem}.{side}.ppm"
        if not image_path.exists():
            continue
        truth = json.loads((root / f"{stem}.truth.json").read_text())
        pixels = parse_ppm(image_path.read_bytes())
        inputs.append(preprocess(task, pixels))
        labels.append(_label(task, truth))
    if len(inputs) < MIN_SAMPLES:
        raise DatasetTooSmall(f"{len(inputs)} samples for task {task!r}, need {MIN_SAMPLES}")
    dtype = np.int64 if task == "windows" else np.float32
    return np.stack(inputs).astype(np.float32), np.array(labels, dtype=dtype)


def split_indices(n: int, seed: int, test_fraction: float = 0.1):
    """Deterministic shuffled 9:1 split; same seed yields the same membership."""
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_test = max(1, round(n * test_fraction))
    return order[n_test:], order[:n_test]
