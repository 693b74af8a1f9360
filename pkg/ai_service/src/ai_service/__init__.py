"""Learned inspection service: per-task CNNs served over the platform's
external-service protocol."""

from .train import DatasetTooSmall, TrainingConfig, train

__all__ = ["TrainingConfig", "DatasetTooSmall", "train"]
