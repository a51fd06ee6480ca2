"""Minimal dense-tensor math with reverse-mode autodiff, layers, and Adam."""

from . import ops
from .checkpoint import CheckpointError, load_archive, save_archive
from .nn import group_norm, linear, log_prob_from_pre_tanh, tanh_gaussian_log_prob
from .optim import AdamState, OptimError, adam_step
from .tensor import (
    AutodiffError,
    Parameter,
    Tensor,
    as_tensor,
    backward,
    grad_enabled,
    no_grad,
)

__all__ = [
    "AdamState",
    "AutodiffError",
    "CheckpointError",
    "OptimError",
    "Parameter",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backward",
    "grad_enabled",
    "group_norm",
    "linear",
    "load_archive",
    "log_prob_from_pre_tanh",
    "no_grad",
    "ops",
    "save_archive",
    "tanh_gaussian_log_prob",
]
