"""2-D multi-task pick-and-place: sort objects into bins on the unit square.

Kinematics only: a point gripper moves by bounded deltas, grasps the
nearest free object within reach, and scores by releasing an object close
enough to its goal bin. Single-object tasks end when the task object is
sorted; the compound task requires sorting both objects. Object types are
distinguishable through their characteristic spawn regions, since the
observation carries positions only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OBS_DIM = 11
ACTION_DIM = 4

MAX_STEP = 0.06
GRASP_RADIUS = 0.08
BIN_RADIUS = 0.1
HORIZON_SINGLE = 40
HORIZON_COMPOUND = 80

# Spawn boxes (xlo, xhi, ylo, yhi). Types 0 and 1 are the standard pair;
# higher types are held out for retargeting experiments.
TYPE_REGIONS = (
    (0.25, 0.40, 0.70, 0.85),
    (0.60, 0.75, 0.70, 0.85),
    (0.42, 0.58, 0.08, 0.23),
    (0.10, 0.25, 0.08, 0.23),
    (0.75, 0.90, 0.08, 0.23),
)
BIN_REGIONS = (
    (0.05, 0.20, 0.40, 0.60),
    (0.80, 0.95, 0.40, 0.60),
)
GRIPPER_START_BOX = (0.35, 0.65, 0.35, 0.65)
OOD_CORNER_SIZE = 0.1


class EnvError(Exception):
    pass


@dataclass(frozen=True)
class TaskSpec:
    """One entry of the task registry: which object goes to which bin."""

    task_id: int
    object_type: int
    target_bin: int
    compound: bool = False


@dataclass
class EnvStep:
    observation: np.ndarray
    reward: float
    done: bool
    image: np.ndarray | None = None


@dataclass
class GridPickState:
    gripper: np.ndarray
    gripper_closed: bool
    object_pos: np.ndarray  # (2, 2)
    object_types: tuple[int, int]
    held: np.ndarray  # (2,) bool
    sorted_flags: np.ndarray  # (2,) bool
    bin_pos: np.ndarray  # (2, 2)


def standard_tasks() -> list[TaskSpec]:
    """Four single-object pre-training tasks over the (0, 1) object pair."""
    specs = []
    tid = 0
    for obj_type in (0, 1):
        for target_bin in (0, 1):
            specs.append(TaskSpec(tid, obj_type, target_bin))
            tid += 1
    return specs


def compound_task(task_id: int) -> TaskSpec:
    return TaskSpec(task_id, object_type=0, target_bin=0, compound=True)


def _sample_box(rng, box):
    xlo, xhi, ylo, yhi = box
    return np.array([rng.uniform(xlo, xhi), rng.uniform(ylo, yhi)])


def _box_center(box):
    xlo, xhi, ylo, yhi = box
    return np.array([(xlo + xhi) / 2.0, (ylo + yhi) / 2.0])


def _farthest_corner(point: np.ndarray) -> np.ndarray:
    corners = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    return corners[np.argmax(np.linalg.norm(corners - point, axis=1))]


class BinSortEnv:
    """Deterministic step; all randomness enters through `reset`."""

    def __init__(self, tasks: list[TaskSpec], render: bool = False,
                 horizon_single: int = HORIZON_SINGLE,
                 horizon_compound: int = HORIZON_COMPOUND):
        self.tasks = {t.task_id: t for t in tasks}
        self.render = render
        self.horizon_single = horizon_single
        self.horizon_compound = horizon_compound
        self.state: GridPickState | None = None
        self.task: TaskSpec | None = None
        self._steps = 0
        self._done = True

    # -- goal structure -------------------------------------------------

    def _scene_types(self, task: TaskSpec) -> tuple[int, int]:
        if task.compound:
            return (0, 1)
        distractor = 1 if task.object_type != 1 else 0
        return tuple(sorted((task.object_type, distractor)))

    def _goal_bins(self, task: TaskSpec) -> dict[int, int]:
        """Map scene slot -> goal bin index; slots without a goal are absent."""
        types = self._scene_types(task)
        if task.compound:
            return {slot: slot for slot in range(len(types))}
        return {types.index(task.object_type): task.target_bin}

    def task_object_slot(self, task: TaskSpec) -> int:
        types = self._scene_types(task)
        return types.index(0 if task.compound else task.object_type)

    @property
    def horizon(self) -> int:
        return self.horizon_compound if self.task.compound else self.horizon_single

    # -- reset / step ----------------------------------------------------

    def reset(self, task_id: int, seed: int, condition_set: str = "in-distribution") -> np.ndarray:
        task = self.tasks.get(task_id)
        if task is None:
            raise EnvError(f"unknown task id {task_id}")
        if condition_set not in ("in-distribution", "held-out-OOD"):
            raise EnvError(f"unknown condition set {condition_set!r}")
        rng = np.random.default_rng(seed)
        types = self._scene_types(task)
        object_pos = np.stack([_sample_box(rng, TYPE_REGIONS[t]) for t in types])
        bin_pos = np.stack([_sample_box(rng, b) for b in BIN_REGIONS])
        if condition_set == "in-distribution":
            gripper = _sample_box(rng, GRIPPER_START_BOX)
        else:
            slot = self.task_object_slot(task)
            corner = _farthest_corner(_box_center(TYPE_REGIONS[types[slot]]))
            lo = np.where(corner == 0.0, 0.0, 1.0 - OOD_CORNER_SIZE)
            gripper = lo + rng.uniform(0.0, OOD_CORNER_SIZE, size=2)
        self.task = task
        self.state = GridPickState(
            gripper=gripper,
            gripper_closed=False,
            object_pos=object_pos,
            object_types=types,
            held=np.zeros(2, dtype=bool),
            sorted_flags=np.zeros(2, dtype=bool),
            bin_pos=bin_pos,
        )
        self._steps = 0
        self._done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        s = self.state
        return np.concatenate(
            [s.gripper, [1.0 if s.gripper_closed else 0.0], s.object_pos.ravel(), s.bin_pos.ravel()]
        )

    def _task_complete(self) -> bool:
        goals = self._goal_bins(self.task)
        return all(self.state.sorted_flags[slot] for slot in goals)

    def step(self, action: np.ndarray) -> EnvStep:
        if self._done:
            raise EnvError("step called on a finished episode; reset first")
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (ACTION_DIM,):
            raise EnvError(f"action must have shape ({ACTION_DIM},), got {action.shape}")
        if np.any(np.abs(action) > 1.0):
            raise EnvError(f"action outside [-1, 1]: {action}")
        s = self.state
        s.gripper = np.clip(s.gripper + MAX_STEP * action[:2], 0.0, 1.0)
        if s.held.any():
            s.object_pos[np.argmax(s.held)] = s.gripper
        close = action[2] > 0.5
        if close and not s.gripper_closed and not s.held.any():
            dists = np.linalg.norm(s.object_pos - s.gripper, axis=1)
            dists[s.sorted_flags] = np.inf
            slot = int(np.argmin(dists))
            if dists[slot] <= GRASP_RADIUS:
                s.held[slot] = True
                s.object_pos[slot] = s.gripper.copy()
        if not close and s.held.any():
            slot = int(np.argmax(s.held))
            s.held[slot] = False
            goals = self._goal_bins(self.task)
            goal_bin = goals.get(slot)
            if goal_bin is not None and (
                np.linalg.norm(s.object_pos[slot] - s.bin_pos[goal_bin]) <= BIN_RADIUS
            ):
                s.sorted_flags[slot] = True
        s.gripper_closed = close
        self._steps += 1
        success = self._task_complete()
        done = success or self._steps >= self.horizon
        self._done = done
        return EnvStep(
            observation=self.observation(),
            reward=1.0 if success else 0.0,
            done=done,
            image=self.render_image() if self.render else None,
        )

    def succeeded(self) -> bool:
        return self._task_complete()

    # -- rendering --------------------------------------------------------

    def render_image(self, size: int = 16) -> np.ndarray:
        """Grayscale top-down view: bins dim, objects mid, gripper bright."""
        img = np.zeros((size, size))
        s = self.state

        def paint(pos, value):
            x = min(int(pos[0] * size), size - 1)
            y = min(int(pos[1] * size), size - 1)
            img[y, x] = max(img[y, x], value)

        for b in range(2):
            paint(s.bin_pos[b], 0.3 + 0.1 * b)
        for slot in range(2):
            paint(s.object_pos[slot], 0.6 + 0.05 * s.object_types[slot])
        paint(s.gripper, 1.0)
        return img
