"""Tabular MDP oracle: exact value iteration for ground-truth Q tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MDPError(Exception):
    pass


@dataclass
class TabularMDP:
    """Finite MDP with dense transition and reward tables.

    transitions: (S, A, S) row-stochastic; rewards: (S, A);
    initial_dist: (S,) simplex vector.
    """

    transitions: np.ndarray
    rewards: np.ndarray
    discount: float
    initial_dist: np.ndarray = field(default=None)

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        s, a, s2 = self.transitions.shape
        if s != s2 or self.rewards.shape != (s, a):
            raise MDPError(
                f"inconsistent tables: P {self.transitions.shape}, R {self.rewards.shape}"
            )
        if self.initial_dist is None:
            self.initial_dist = np.full(s, 1.0 / s)
        self.initial_dist = np.asarray(self.initial_dist, dtype=np.float64)
        if not (0.0 < self.discount < 1.0):
            raise MDPError(f"discount must lie in (0,1), got {self.discount}")
        rowsums = self.transitions.sum(axis=2)
        if np.max(np.abs(rowsums - 1.0)) > 1e-12 or np.any(self.transitions < 0):
            raise MDPError("transition table is not row-stochastic")
        if abs(self.initial_dist.sum() - 1.0) > 1e-12:
            raise MDPError("initial distribution does not sum to 1")

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]


def value_iteration(mdp: TabularMDP, tolerance: float) -> np.ndarray:
    """Optimal Q table with sup-norm Bellman residual below `tolerance`.

    Iterates the Bellman optimality operator; once successive iterates are
    within `tolerance`, one more application bounds the residual of the
    returned table by discount * tolerance.
    """
    if tolerance <= 0:
        raise MDPError(f"tolerance must be positive, got {tolerance}")
    q = np.zeros((mdp.num_states, mdp.num_actions))
    while True:
        v = q.max(axis=1)
        q_next = mdp.rewards + mdp.discount * (mdp.transitions @ v)
        if np.max(np.abs(q_next - q)) < tolerance:
            return q_next
        q = q_next


def random_mdp(
    num_states: int,
    num_actions: int,
    rng: np.random.Generator,
    deterministic: bool = False,
    discount: float = 0.9,
) -> TabularMDP:
    """Random dense MDP; deterministic mode draws one successor per (s, a)."""
    if deterministic:
        p = np.zeros((num_states, num_actions, num_states))
        succ = rng.integers(0, num_states, size=(num_states, num_actions))
        for s in range(num_states):
            for a in range(num_actions):
                p[s, a, succ[s, a]] = 1.0
    else:
        p = rng.gamma(1.0, size=(num_states, num_actions, num_states)) + 1e-6
        p /= p.sum(axis=2, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=(num_states, num_actions))
    mu0 = np.full(num_states, 1.0 / num_states)
    return TabularMDP(p, r, discount, mu0)
