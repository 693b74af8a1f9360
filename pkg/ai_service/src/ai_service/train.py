"""Training loop: Adam with the fixed hyperparameters, per-task loss heads,
metrics JSON and saved model weights."""

from __future__ import annotations

import argparse
import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import DatasetTooSmall, load_task_dataset, split_indices
from .model import TASK_OUTPUTS, build_model
from .preprocess import TASKS


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-07
    epochs: int = 50
    batch_size: int = 20
    test_fraction: float = 0.1  # 9:1 train/test split
    seed: int = 42


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def _accuracy(model, inputs: torch.Tensor, labels: torch.Tensor) -> float:
    probs = model.predict(inputs)
    if model.task == "windows":
        predicted = probs.argmax(dim=1)
        return float((predicted == labels).float().mean())
    predicted = (probs.squeeze(1) >= 0.5).float()
    return float((predicted == labels).float().mean())


def train(task: str, dataset_dir, config: TrainingConfig | None = None, out_dir="models") -> dict:
    """Train one task model; saves weights and metrics, returns the metrics."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    config = config or TrainingConfig()
    _seed_everything(config.seed)

    # Augmented variants (flip/rotate/zoom) move defects out of the fixed
    # preprocessing regions and would only add label noise; train on the
    # canonical views.
    inputs, labels = load_task_dataset(task, dataset_dir, include_augmented=False)
    train_idx, test_idx = split_indices(len(inputs), config.seed, config.test_fraction)
    x_train = torch.from_numpy(inputs[train_idx])
    x_test = torch.from_numpy(inputs[test_idx])
    y_train = torch.from_numpy(labels[train_idx])
    y_test = torch.from_numpy(labels[test_idx])

    model = build_model(task)
    if TASK_OUTPUTS[task] == 1:
        criterion = nn.BCEWithLogitsLoss()
    else:
        criterion = nn.CrossEntropyLoss()
    optimizer = torch.optim.Adam(
        model.parameters(),
        lr=config.learning_rate,
        betas=(config.beta1, config.beta2),
        eps=config.epsilon,
    )

    epoch_losses = []
    n = len(x_train)
    for _epoch in range(config.epochs):
        model.train()
        order = torch.randperm(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            optimizer.zero_grad()
            logits = model(x_train[batch])
            if TASK_OUTPUTS[task] == 1:
                loss = criterion(logits.squeeze(1), y_train[batch])
            else:
                loss = criterion(logits, y_train[batch])
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(batch)
        epoch_losses.append(total / n)

    metrics = {
        "task": task,
        "parameterCount": model.parameter_count(),
        "trainAccuracy": _accuracy(model, x_train, y_train),
        "testAccuracy": _accuracy(model, x_test, y_test),
        "epochLosses": [round(loss, 6) for loss in epoch_losses],
        "trainSamples": len(train_idx),
        "testSamples": len(test_idx),
        "config": asdict(config),
    }

    target = Path(out_dir) / task
    target.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), target / "model.pt")
    (target / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    return metrics


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="train the inspection task models")
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--out", default="models")
    parser.add_argument("--tasks", nargs="+", default=list(TASKS), choices=TASKS)
    parser.add_argument("--epochs", type=int, default=TrainingConfig.epochs)
    parser.add_argument("--seed", type=int, default=TrainingConfig.seed)
    args = parser.parse_args(argv)
    config = TrainingConfig(epochs=args.epochs, seed=args.seed)
    for task in args.tasks:
        metrics = train(task, args.dataset, config, args.out)
        print(
            f"{task}: {metrics['parameterCount']} params, "
            f"train {metrics['trainAccuracy']:.3f}, test {metrics['testAccuracy']:.3f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
