"""Multi-task trajectory storage, relabeling, mixing, and serialization."""

from .core import (
    Batch,
    DatasetError,
    MultiTaskDataset,
    TaskRegistry,
    Trajectory,
    Transition,
    TransitionPool,
    retarget,
)
from .relabel import relabel_classifier_rewards, relabel_rewards
from .sampler import MixingSpec, largest_remainder_counts, sample_mixed_batch
from .serial import load, save

__all__ = [
    "Batch",
    "DatasetError",
    "MixingSpec",
    "MultiTaskDataset",
    "TaskRegistry",
    "Trajectory",
    "Transition",
    "TransitionPool",
    "largest_remainder_counts",
    "load",
    "relabel_classifier_rewards",
    "relabel_rewards",
    "retarget",
    "sample_mixed_batch",
    "save",
]
