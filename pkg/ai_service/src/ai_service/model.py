"""Per-task CNNs built from depthwise-separable convolution blocks.

Each task has its own small model; the parameter budget is 500k per task to
fit constrained edge devices.
"""

from __future__ import annotations

import torch
from torch import nn

from .preprocess import INPUT_SIZE

PARAMETER_BUDGET = 500_000

TASK_CHANNELS = {"scratch": 1, "engraving": 1, "windows": 2}
TASK_OUTPUTS = {"scratch": 1, "engraving": 1, "windows": 3}


class SeparableConv2d(nn.Module):
    """Depthwise convolution followed by a pointwise 1x1 projection."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 3):
        super().__init__()
        self.depthwise = nn.Conv2d(
            in_channels,
            in_channels,
            kernel_size,
            padding=kernel_size // 2,
            groups=in_channels,
        )
        self.pointwise = nn.Conv2d(in_channels, out_channels, 1)

    def forward(self, x):
        return self.pointwise(self.depthwise(x))


class TaskModel(nn.Module):
    """Two separable conv blocks, pooling, and a small dense head.

    Binary tasks (scratch, engraving) emit one logit (sigmoid probability);
    the windows task emits three logits (softmax over 1..3 windows).
    """

    def __init__(self, task: str, width: int = 16):
        super().__init__()
        if task not in TASK_CHANNELS:
            raise ValueError(f"unknown task {task!r}")
        self.task = task
        in_channels = TASK_CHANNELS[task]
        out_features = TASK_OUTPUTS[task]
        self.features = nn.Sequential(
            SeparableConv2d(in_channels, width),
            nn.ReLU(),
            nn.MaxPool2d(4),
            SeparableConv2d(width, width * 2),
            nn.ReLU(),
            nn.MaxPool2d(4),
        )
        flat = width * 2 * (INPUT_SIZE // 16) ** 2
        hidden = 16 * width
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(flat, hidden),
            nn.ReLU(),
            nn.Linear(hidden, out_features),
        )

    def forward(self, x):
        return self.head(self.features(x))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def predict(self, inputs: torch.Tensor) -> torch.Tensor:
        """Probabilities: (N, 1) in [0, 1] for binary tasks, (N, 3) simplex
        for the windows task."""
        self.eval()
        with torch.no_grad():
            logits = self(inputs)
            if self.task == "windows":
                return torch.softmax(logits, dim=1)
            return torch.sigmoid(logits)


def build_model(task: str) -> TaskModel:
    model = TaskModel(task)
    count = model.parameter_count()
    if count > PARAMETER_BUDGET:
        raise ValueError(f"{task} model has {count} parameters, budget is {PARAMETER_BUDGET}")
    return model
