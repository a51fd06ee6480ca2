"""Closed-loop waypoint demonstrator for the bin-sort tasks."""

from __future__ import annotations

import numpy as np

from ..datasets import Trajectory
from .binsort import ACTION_DIM, BIN_RADIUS, GRASP_RADIUS, MAX_STEP, BinSortEnv

REACH_TOL = GRASP_RADIUS * 0.5
DROP_TOL = BIN_RADIUS * 0.5


def controller_action(env: BinSortEnv) -> np.ndarray:
    """Reach, grasp, carry, release toward the first unfinished goal.

    Recomputed from the live state every step, so noise-induced slips
    (missed grasps, early drops) are simply retried.
    """
    s = env.state
    goals = env._goal_bins(env.task)
    action = np.zeros(ACTION_DIM)
    if s.held.any():
        slot = int(np.argmax(s.held))
        goal_bin = goals.get(slot)
        if goal_bin is None:
            action[2] = -1.0  # grabbed a distractor; drop it
            return action
        target = s.bin_pos[goal_bin]
        if np.linalg.norm(s.gripper - target) <= DROP_TOL:
            action[2] = -1.0
            return action
        action[:2] = np.clip((target - s.gripper) / MAX_STEP, -1.0, 1.0)
        action[2] = 1.0
        return action
    pending = [slot for slot, _ in sorted(goals.items()) if not s.sorted_flags[slot]]
    if not pending:
        return action
    slot = pending[0]
    target = s.object_pos[slot]
    if np.linalg.norm(s.gripper - target) <= REACH_TOL:
        action[2] = 1.0
        return action
    action[:2] = np.clip((target - s.gripper) / MAX_STEP, -1.0, 1.0)
    action[2] = -1.0
    return action


def scripted_demo(
    env: BinSortEnv,
    task_id: int,
    noise_sigma: float,
    seed: int,
    condition_set: str = "in-distribution",
) -> Trajectory:
    """Run the waypoint controller with Gaussian action noise.

    Returns the full trajectory with raw environment rewards; a noisy run
    that misses the goal is still returned and left to the caller to
    filter (success iff the final raw reward is 1).
    """
    if noise_sigma < 0:
        raise ValueError(f"noise sigma must be nonnegative, got {noise_sigma}")
    reset_seed, noise_seed = np.random.SeedSequence(seed).spawn(2)
    obs = env.reset(task_id, seed=reset_seed, condition_set=condition_set)
    noise_rng = np.random.default_rng(noise_seed)
    observations, actions, rewards, next_observations, dones = [], [], [], [], []
    done = False
    while not done:
        action = controller_action(env)
        if noise_sigma > 0:
            action = action + noise_sigma * noise_rng.normal(size=ACTION_DIM)
        action = np.clip(action, -1.0, 1.0)
        step = env.step(action)
        observations.append(obs)
        actions.append(action)
        rewards.append(step.reward)
        next_observations.append(step.observation)
        dones.append(step.done)
        obs = step.observation
        done = step.done
    return Trajectory(
        observations=np.array(observations),
        actions=np.array(actions),
        rewards=np.array(rewards),
        next_observations=np.array(next_observations),
        dones=np.array(dones, dtype=bool),
        task_id=task_id,
    )


def demo_succeeded(traj: Trajectory) -> bool:
    return bool(traj.rewards[-1] == 1.0)
