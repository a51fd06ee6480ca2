"""Self-describing binary dataset files: JSON header + float64 blocks."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import DatasetError, MultiTaskDataset, TaskRegistry, Trajectory

MAGIC = b"DESKRL-DATA-1\n"
SCHEMA_VERSION = 1


def _blocks(traj: Trajectory):
    yield traj.observations
    yield traj.actions
    yield traj.rewards
    yield traj.next_observations
    yield traj.dones.astype(np.float64)
    if traj.mc_returns is not None:
        yield traj.mc_returns


def save(dataset: MultiTaskDataset, path) -> None:
    records = []
    trajs = []
    for task_id in dataset.task_ids():
        for traj in dataset.chunks[task_id]:
            records.append(
                {
                    "task_id": traj.task_id,
                    "source": traj.source,
                    "scaled": traj.scaled,
                    "length": len(traj),
                    "obs_dim": traj.observations.shape[1],
                    "act_dim": traj.actions.shape[1],
                    "has_mc": traj.mc_returns is not None,
                }
            )
            trajs.append(traj)
    header = json.dumps(
        {
            "schema": SCHEMA_VERSION,
            "meta": {k: v for k, v in sorted(dataset.meta.items())},
            "registry": {
                "num_pretrain": dataset.registry.num_pretrain,
                "num_placeholders": dataset.registry.num_placeholders,
            },
            "trajectories": records,
        }
    ).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for traj in trajs:
            for block in _blocks(traj):
                f.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def load(path) -> MultiTaskDataset:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise DatasetError(f"{path}: not a dataset file (bad magic)")
    off = len(MAGIC)
    if len(raw) < off + 8:
        raise DatasetError(f"{path}: truncated header length")
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    if len(raw) < off + hlen:
        raise DatasetError(f"{path}: truncated header")
    header = json.loads(raw[off : off + hlen].decode())
    off += hlen
    if header.get("schema") != SCHEMA_VERSION:
        raise DatasetError(
            f"{path}: schema version {header.get('schema')} unsupported (need {SCHEMA_VERSION})"
        )
    registry = TaskRegistry(
        num_pretrain=header["registry"]["num_pretrain"],
        num_placeholders=header["registry"]["num_placeholders"],
    )
    dataset = MultiTaskDataset(registry, meta=header["meta"])

    def read_block(shape):
        nonlocal off
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * 8
        if len(raw) < off + nbytes:
            raise DatasetError(f"{path}: truncated trajectory block")
        block = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        off += nbytes
        return block.astype(np.float64)

    for rec in header["trajectories"]:
        t, od, ad = rec["length"], rec["obs_dim"], rec["act_dim"]
        obs = read_block((t, od))
        actions = read_block((t, ad))
        rewards = read_block((t,))
        next_obs = read_block((t, od))
        dones = read_block((t,)).astype(bool)
        mc = read_block((t,)) if rec["has_mc"] else None
        dataset.add(
            Trajectory(
                observations=obs,
                actions=actions,
                rewards=rewards,
                next_observations=next_obs,
                dones=dones,
                task_id=rec["task_id"],
                source=rec["source"],
                scaled=rec["scaled"],
                mc_returns=mc,
            )
        )
    if off != len(raw):
        raise DatasetError(f"{path}: {len(raw) - off} trailing bytes")
    return dataset
