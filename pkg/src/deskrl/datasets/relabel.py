"""Demonstration reward relabeling and discounted return-to-go stamping."""

from __future__ import annotations

import numpy as np

from .core import DatasetError, Trajectory


def relabel_rewards(
    traj: Trajectory, n: int, shift: float, scale: float, discount: float
) -> Trajectory:
    """Mark the last min(n, length) transitions successful, then rescale.

    Raw rewards become 1 on the tail and 0 elsewhere; the stored reward is
    scale * raw + shift. The final transition is terminal, and mc_returns
    holds the discounted return-to-go under `discount`. Only raw
    trajectories may be relabeled; the `scaled` flag trips otherwise.
    """
    if n < 1:
        raise DatasetError(f"n must be >= 1, got {n}")
    if traj.scaled:
        raise DatasetError("trajectory rewards are already scaled; relabel raw data only")
    t = len(traj)
    raw = np.zeros(t)
    raw[-min(n, t):] = 1.0
    rewards = scale * raw + shift
    mc = np.empty(t)
    mc[-1] = rewards[-1]
    for i in range(t - 2, -1, -1):
        mc[i] = rewards[i] + discount * mc[i + 1]
    dones = np.zeros(t, dtype=bool)
    dones[-1] = True
    return Trajectory(
        observations=traj.observations,
        actions=traj.actions,
        rewards=rewards,
        next_observations=traj.next_observations,
        dones=dones,
        task_id=traj.task_id,
        source=traj.source,
        scaled=True,
        mc_returns=mc,
    )


def relabel_classifier_rewards(
    traj: Trajectory,
    success_flags: np.ndarray,
    shift: float,
    scale: float,
    discount: float,
) -> Trajectory:
    """Scale classifier-produced {0,1} per-step rewards like relabel_rewards.

    Used for autonomously collected rollouts, where success is judged per
    observation instead of by trajectory position.
    """
    if traj.scaled:
        raise DatasetError("trajectory rewards are already scaled; relabel raw data only")
    t = len(traj)
    raw = np.asarray(success_flags, dtype=np.float64)
    if raw.shape != (t,):
        raise DatasetError(f"success flags shape {raw.shape} != ({t},)")
    rewards = scale * raw + shift
    mc = np.empty(t)
    mc[-1] = rewards[-1]
    for i in range(t - 2, -1, -1):
        mc[i] = rewards[i] + discount * mc[i + 1]
    return Trajectory(
        observations=traj.observations,
        actions=traj.actions,
        rewards=rewards,
        next_observations=traj.next_observations,
        dones=traj.dones,
        task_id=traj.task_id,
        source=traj.source,
        scaled=True,
        mc_returns=mc,
    )
