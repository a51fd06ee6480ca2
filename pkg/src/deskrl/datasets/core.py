"""Chunked multi-task trajectory storage with a task registry.

Trajectories are stored struct-of-arrays for cheap batch assembly; the
`Transition` view exists for code that wants one tuple at a time. The
dataset is immutable after construction except through `add`/`retarget`,
which the online collector serializes behind an internal lock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

import numpy as np


class DatasetError(Exception):
    pass


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool
    task_id: int
    mc_return: float


@dataclass
class Trajectory:
    observations: np.ndarray  # (T, obs_dim)
    actions: np.ndarray  # (T, act_dim)
    rewards: np.ndarray  # (T,)
    next_observations: np.ndarray  # (T, obs_dim)
    dones: np.ndarray  # (T,) bool
    task_id: int
    source: str = "pretrain"  # pretrain | target | online
    scaled: bool = False
    mc_returns: np.ndarray | None = None

    def __post_init__(self):
        t = len(self.rewards)
        if t == 0:
            raise DatasetError("empty trajectory")
        if self.observations.shape[0] != t or self.next_observations.shape[0] != t:
            raise DatasetError("observation arrays disagree with trajectory length")
        if t > 1 and not np.array_equal(self.next_observations[:-1], self.observations[1:]):
            raise DatasetError("consecutive next_obs/obs disagree")
        if np.any(self.dones[:-1]):
            raise DatasetError("done=true before the final transition")
        if self.source not in ("pretrain", "target", "online"):
            raise DatasetError(f"unknown source tag {self.source!r}")

    def __len__(self) -> int:
        return len(self.rewards)

    def transition(self, t: int) -> Transition:
        mc = float(self.mc_returns[t]) if self.mc_returns is not None else float("nan")
        return Transition(
            obs=self.observations[t],
            action=self.actions[t],
            reward=float(self.rewards[t]),
            next_obs=self.next_observations[t],
            done=bool(self.dones[t]),
            task_id=self.task_id,
            mc_return=mc,
        )

    def with_task_id(self, task_id: int) -> "Trajectory":
        return replace(self, task_id=task_id)


@dataclass(frozen=True)
class TaskRegistry:
    """Fixed one-hot layout: pre-training ids then placeholder ids."""

    num_pretrain: int
    num_placeholders: int

    @property
    def onehot_dim(self) -> int:
        return self.num_pretrain + self.num_placeholders

    @property
    def pretrain_ids(self) -> range:
        return range(self.num_pretrain)

    @property
    def placeholder_ids(self) -> range:
        return range(self.num_pretrain, self.onehot_dim)

    def is_registered(self, task_id: int) -> bool:
        return 0 <= task_id < self.onehot_dim

    def is_placeholder(self, task_id: int) -> bool:
        return self.num_pretrain <= task_id < self.onehot_dim


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray
    mc_returns: np.ndarray
    task_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)


@dataclass
class TransitionPool:
    """Flattened transitions from one or more chunks; uniform index access."""

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray
    mc_returns: np.ndarray
    task_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)

    def take(self, idx: np.ndarray) -> Batch:
        return Batch(
            obs=self.obs[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_obs=self.next_obs[idx],
            dones=self.dones[idx],
            mc_returns=self.mc_returns[idx],
            task_ids=self.task_ids[idx],
        )


def _pool_from_trajectories(trajs: list[Trajectory]) -> TransitionPool:
    if not trajs:
        raise DatasetError("cannot build a pool from zero trajectories")
    mc_blocks = [
        t.mc_returns if t.mc_returns is not None else np.full(len(t), np.nan) for t in trajs
    ]
    return TransitionPool(
        obs=np.concatenate([t.observations for t in trajs]),
        actions=np.concatenate([t.actions for t in trajs]),
        rewards=np.concatenate([t.rewards for t in trajs]),
        next_obs=np.concatenate([t.next_observations for t in trajs]),
        dones=np.concatenate([t.dones for t in trajs]).astype(np.float64),
        mc_returns=np.concatenate(mc_blocks),
        task_ids=np.concatenate([np.full(len(t), t.task_id, dtype=np.int64) for t in trajs]),
    )


class MultiTaskDataset:
    """Chunked store: task id -> list of trajectories."""

    def __init__(self, registry: TaskRegistry, meta: dict | None = None):
        self.registry = registry
        self.meta = dict(meta or {})
        self.chunks: dict[int, list[Trajectory]] = {}
        self._lock = threading.Lock()
        self._pool_cache: dict[tuple, TransitionPool] = {}

    def add(self, traj: Trajectory) -> None:
        if not self.registry.is_registered(traj.task_id):
            raise DatasetError(f"task id {traj.task_id} is not registered")
        with self._lock:
            self.chunks.setdefault(traj.task_id, []).append(traj)
            self._pool_cache.clear()

    def task_ids(self) -> list[int]:
        return sorted(self.chunks)

    def trajectories(self, task_id: int) -> list[Trajectory]:
        return list(self.chunks.get(task_id, []))

    def num_trajectories(self, task_id: int | None = None) -> int:
        if task_id is not None:
            return len(self.chunks.get(task_id, []))
        return sum(len(v) for v in self.chunks.values())

    def pool(self, task_ids=None) -> TransitionPool:
        """Transitions of the selected chunks (all chunks when None), cached."""
        key = tuple(sorted(task_ids)) if task_ids is not None else None
        with self._lock:
            cached = self._pool_cache.get(key)
            if cached is not None:
                return cached
            ids = self.task_ids() if key is None else list(key)
            trajs = [t for tid in ids for t in self.chunks.get(tid, [])]
            pool = _pool_from_trajectories(trajs)
            self._pool_cache[key] = pool
            return pool


def retarget(
    dataset: MultiTaskDataset,
    existing_task_id: int,
    new_trajectories: list[Trajectory],
    evict: bool = False,
) -> MultiTaskDataset:
    """Stamp `new_trajectories` with an already-registered id and append them.

    With `evict`, the id's previous chunk is dropped first, so the
    identifier is fully re-purposed.
    """
    if not dataset.registry.is_registered(existing_task_id):
        raise DatasetError(f"task id {existing_task_id} is not registered")
    with dataset._lock:
        if evict:
            dataset.chunks[existing_task_id] = []
        dataset._pool_cache.clear()
    for traj in new_trajectories:
        dataset.add(traj.with_task_id(existing_task_id))
    return dataset
