"""Tabular oracle MDP and the 2-D bin-sort environment with scripted demos."""

from .binsort import (
    ACTION_DIM,
    BIN_RADIUS,
    GRASP_RADIUS,
    HORIZON_COMPOUND,
    HORIZON_SINGLE,
    MAX_STEP,
    OBS_DIM,
    BinSortEnv,
    EnvError,
    EnvStep,
    GridPickState,
    TaskSpec,
    compound_task,
    standard_tasks,
)
from .scripted import controller_action, demo_succeeded, scripted_demo
from .tabular import MDPError, TabularMDP, random_mdp, value_iteration

__all__ = [
    "ACTION_DIM",
    "BIN_RADIUS",
    "BinSortEnv",
    "EnvError",
    "EnvStep",
    "GRASP_RADIUS",
    "GridPickState",
    "HORIZON_COMPOUND",
    "HORIZON_SINGLE",
    "MAX_STEP",
    "MDPError",
    "OBS_DIM",
    "TabularMDP",
    "TaskSpec",
    "compound_task",
    "controller_action",
    "demo_succeeded",
    "random_mdp",
    "scripted_demo",
    "standard_tasks",
    "value_iteration",
]
