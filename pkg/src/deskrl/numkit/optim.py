"""Bias-corrected Adam over named parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Parameter


class OptimError(Exception):
    pass


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: list[Parameter], state: AdamState, learning_rate: float) -> None:
    """One Adam update in place; moments are keyed by parameter name."""
    if learning_rate < 0.0:
        raise OptimError(f"learning_rate must be nonnegative, got {learning_rate}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p in params:
        g = p.grad
        if g.shape != p.value.data.shape:
            raise OptimError(
                f"grad shape {g.shape} != value shape {p.value.data.shape} for {p.name!r}"
            )
        m = state.m.get(p.name)
        if m is None:
            m = state.m[p.name] = np.zeros_like(p.value.data)
            state.v[p.name] = np.zeros_like(p.value.data)
        v = state.v[p.name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p.value.data = p.value.data - learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
