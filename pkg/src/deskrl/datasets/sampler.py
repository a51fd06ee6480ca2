"""Exact-count batch mixing across transition sources."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Batch, DatasetError, TransitionPool


@dataclass(frozen=True)
class MixingSpec:
    """Batch-mixing fractions for the fine-tuning phases.

    tau: pre-training fraction during offline fine-tuning. beta_mix: the
    online-phase split over (pretrain, target, online) sources.
    """

    tau: float = 0.8
    beta_mix: tuple[float, ...] = (0.35, 0.15, 0.5)
    batch_size: int = 256

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DatasetError(f"tau must lie in [0,1], got {self.tau}")
        if any(not 0.0 <= b <= 1.0 for b in self.beta_mix):
            raise DatasetError(f"beta fractions must lie in [0,1], got {self.beta_mix}")


def largest_remainder_counts(fractions: list[float], batch_size: int) -> list[int]:
    """Integer counts summing to batch_size: floor each, then hand the
    leftovers to the largest remainders (ties to the earlier source)."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DatasetError(f"fractions sum to {sum(fractions)}, expected 1")
    exact = [f * batch_size for f in fractions]
    counts = [int(np.floor(x)) for x in exact]
    remainders = [x - c for x, c in zip(exact, counts)]
    shortfall = batch_size - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order[:shortfall]:
        counts[i] += 1
    return counts


def sample_mixed_batch(
    sources: list[tuple[TransitionPool, float]],
    batch_size: int,
    rng: np.random.Generator,
) -> Batch:
    """Exactly round(fraction * batch_size) transitions per source
    (largest-remainder rounding), uniform with replacement within each."""
    counts = largest_remainder_counts([f for _, f in sources], batch_size)
    picks = []
    for (pool, fraction), count in zip(sources, counts):
        if count == 0:
            continue
        if pool is None or len(pool) == 0:
            raise DatasetError(
                f"source with fraction {fraction} is empty but owes {count} transitions"
            )
        idx = rng.integers(0, len(pool), size=count)
        picks.append(pool.take(idx))
    return Batch(
        obs=np.concatenate([b.obs for b in picks]),
        actions=np.concatenate([b.actions for b in picks]),
        rewards=np.concatenate([b.rewards for b in picks]),
        next_obs=np.concatenate([b.next_obs for b in picks]),
        dones=np.concatenate([b.dones for b in picks]),
        mc_returns=np.concatenate([b.mc_returns for b in picks]),
        task_ids=np.concatenate([b.task_ids for b in picks]),
    )
