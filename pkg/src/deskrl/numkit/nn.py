"""Layer primitives: linear, group normalization, tanh-Gaussian densities."""

from __future__ import annotations

import math

import numpy as np

from . import ops
from .tensor import AutodiffError, Tensor, as_tensor

GROUP_NORM_EPS = 1e-5
LOG_TWO_PI = math.log(2.0 * math.pi)


def linear(x, weight, bias) -> Tensor:
    return ops.add(ops.matmul(x, weight), bias)


def group_norm(x, num_groups: int, gain, bias) -> Tensor:
    """Normalize (N, C, H, W) per sample and channel group, then affine.

    Zero-variance inputs map to zero before the affine, so constant
    feature maps are well defined.
    """
    x = as_tensor(x)
    n, c, h, w = x.shape
    if c % num_groups != 0:
        raise AutodiffError(f"{c} channels not divisible into {num_groups} groups")
    grouped = ops.reshape(x, (n, num_groups, (c // num_groups) * h * w))
    mu = ops.mean(grouped, axis=2, keepdims=True)
    centered = ops.sub(grouped, mu)
    var = ops.mean(ops.mul(centered, centered), axis=2, keepdims=True)
    normed = ops.div(centered, ops.sqrt(ops.add(var, GROUP_NORM_EPS)))
    normed = ops.reshape(normed, (n, c, h, w))
    gain = ops.reshape(as_tensor(gain), (1, c, 1, 1))
    bias = ops.reshape(as_tensor(bias), (1, c, 1, 1))
    return ops.add(ops.mul(normed, gain), bias)


def log_prob_from_pre_tanh(mean, log_std, pre_tanh) -> Tensor:
    """Log density of tanh(N(mean, exp(log_std)^2)) at tanh(pre_tanh).

    Returns one scalar per sample (row). Gradients flow through all three
    arguments, so this serves both the reparameterized policy path and
    density evaluation of dataset actions.
    """
    mean, log_std, pre_tanh = as_tensor(mean), as_tensor(log_std), as_tensor(pre_tanh)
    std = ops.exp(log_std)
    z = ops.div(ops.sub(pre_tanh, mean), std)
    gauss = ops.sum(
        ops.sub(ops.mul(ops.mul(z, z), -0.5), ops.add(log_std, 0.5 * LOG_TWO_PI)),
        axis=1,
    )
    # log(1 - tanh(u)^2) == 2 * (log 2 - u - softplus(-2u)), stable for large |u|.
    correction = ops.sum(
        ops.mul(
            ops.sub(ops.sub(math.log(2.0), pre_tanh), ops.softplus(ops.mul(pre_tanh, -2.0))),
            2.0,
        ),
        axis=1,
    )
    return ops.sub(gauss, correction)


def tanh_gaussian_log_prob(mean, log_std, action) -> Tensor:
    """Log density of a tanh-squashed Gaussian at `action` in (-1, 1)^d."""
    action = as_tensor(action)
    if not np.all(np.abs(action.data) < 1.0):
        raise AutodiffError("tanh_gaussian_log_prob needs |action| < 1; clip upstream")
    if not np.all(np.isfinite(as_tensor(log_std).data)):
        raise AutodiffError("non-finite log_std")
    return log_prob_from_pre_tanh(mean, log_std, ops.atanh(action))
