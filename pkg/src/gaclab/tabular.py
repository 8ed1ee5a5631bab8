"""Finite MDPs, an exact value-iteration oracle, and double-table
greedy-softmax value iteration with an increasing inverse-temperature
schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TabularMDP",
    "QTablePair",
    "BetaSchedule",
    "GdqTrace",
    "value_iteration_oracle",
    "gdq_value_iteration",
    "random_mdp",
]


@dataclass(frozen=True)
class TabularMDP:
    """Finite MDP: transition[s, a, s'] is a probability tensor, reward[s, a]
    a bounded real table, gamma in [0, 1)."""

    n_states: int
    n_actions: int
    transition: np.ndarray
    reward: np.ndarray
    gamma: float

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=np.float64)
        r = np.asarray(self.reward, dtype=np.float64)
        if p.shape != (self.n_states, self.n_actions, self.n_states):
            raise ValueError(f"transition shape {p.shape} does not match declared sizes")
        if r.shape != (self.n_states, self.n_actions):
            raise ValueError(f"reward shape {r.shape} does not match declared sizes")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=2) - 1.0) > 1e-12):
            raise ValueError("transition rows must be probability vectors")
        if not np.all(np.isfinite(r)):
            raise ValueError("rewards must be finite")
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "reward", r)

    @property
    def reward_bounds(self) -> tuple[float, float]:
        return float(self.reward.min()), float(self.reward.max())


@dataclass
class QTablePair:
    """Two independent (n_states, n_actions) action-value tables."""

    q1: np.ndarray
    q2: np.ndarray

    def __post_init__(self):
        self.q1 = np.asarray(self.q1, dtype=np.float64).copy()
        self.q2 = np.asarray(self.q2, dtype=np.float64).copy()
        if self.q1.shape != self.q2.shape:
            raise ValueError("q1 and q2 must share a shape")
        if not (np.all(np.isfinite(self.q1)) and np.all(np.isfinite(self.q2))):
            raise ValueError("Q tables must be finite")

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "QTablePair":
        return cls(np.zeros((n_states, n_actions)), np.zeros((n_states, n_actions)))

    @classmethod
    def random_uniform(cls, n_states: int, n_actions: int, rng: np.random.Generator) -> "QTablePair":
        return cls(
            rng.uniform(0.0, 1.0, size=(n_states, n_actions)),
            rng.uniform(0.0, 1.0, size=(n_states, n_actions)),
        )


@dataclass(frozen=True)
class BetaSchedule:
    """Inverse-temperature schedule over iteration index t >= 1.

    rule "linear" gives base * t (nondecreasing, unbounded for base > 0);
    rule "constant" holds base fixed, useful as a negative control.
    """

    base: float
    rule: str = "linear"

    def __post_init__(self):
        if self.base < 0:
            raise ValueError("base must be nonnegative")
        if self.rule not in ("linear", "constant"):
            raise ValueError(f"unknown schedule rule {self.rule!r}")

    def beta_at(self, t: int) -> float:
        if t < 1:
            raise ValueError("iteration index starts at 1")
        return self.base * t if self.rule == "linear" else self.base


def value_iteration_oracle(mdp: TabularMDP, tol: float) -> np.ndarray:
    """Brute-force optimal Q via standard value iteration.

    Iterates Q <- r + gamma * P max_a' Q until the Bellman residual
    ||TQ - Q||_inf drops to tol. The iteration count is capped by the
    geometric bound implied by gamma and the initial residual.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = np.zeros((mdp.n_states, mdp.n_actions))
    # residual shrinks by gamma per sweep; bound iterations accordingly
    first = mdp.reward + mdp.gamma * mdp.transition @ q.max(axis=1)
    delta = float(np.max(np.abs(first - q)))
    if delta <= tol:
        return first
    if mdp.gamma == 0.0:
        return first
    max_iters = int(math.ceil(math.log(tol / max(delta, 1e-300)) / math.log(mdp.gamma))) + 2
    q = first
    for _ in range(max_iters):
        backed = mdp.reward + mdp.gamma * mdp.transition @ q.max(axis=1)
        if float(np.max(np.abs(backed - q))) <= tol:
            return backed
        q = backed
    raise ValueError("value iteration failed to converge; MDP invariants violated?")


@dataclass
class GdqTrace:
    """Full iteration history of double-table greedy-softmax value iteration."""

    pairs: list[QTablePair]
    beta_values: np.ndarray
    sup_norm_to_qstar: np.ndarray
    q_star: np.ndarray

    @property
    def final_distance(self) -> float:
        return float(self.sup_norm_to_qstar[-1])

    def max_q1(self) -> np.ndarray:
        return np.array([p.q1.max() for p in self.pairs])

    def max_q2(self) -> np.ndarray:
        return np.array([p.q2.max() for p in self.pairs])


def _gdq_state_values(q1: np.ndarray, q2: np.ndarray, beta: float) -> np.ndarray:
    """Per-state softmax(greedy)-weighted conservative value, vectorized
    over states with per-row max subtraction."""
    q_max = np.maximum(q1, q2)
    q_min = np.minimum(q1, q2)
    z = beta * q_max
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    w = e / e.sum(axis=1, keepdims=True)
    return np.sum(w * q_min, axis=1)


def gdq_value_iteration(
    mdp: TabularMDP,
    schedule: BetaSchedule,
    max_iters: int,
    init: QTablePair,
    update: str = "alternate",
    q_star: np.ndarray | None = None,
    keep_pairs: bool = True,
) -> GdqTrace:
    """Run max_iters sweeps of the greedy-softmax backup on a double table.

    Each sweep computes V(s') from the current pair at beta_t, backs it up
    through the dynamics, and refreshes q1 (odd sweeps) or q2 (even sweeps)
    to the new target; update="simultaneous" refreshes both. The trace
    records the sup-norm distance to the exact optimum after every sweep.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if update not in ("alternate", "simultaneous"):
        raise ValueError(f"unknown update rule {update!r}")
    if init.q1.shape != (mdp.n_states, mdp.n_actions):
        raise ValueError("init tables do not match the MDP shape")
    if q_star is None:
        q_star = value_iteration_oracle(mdp, tol=1e-12)

    q1 = init.q1.copy()
    q2 = init.q2.copy()
    pairs: list[QTablePair] = []
    betas = np.empty(max_iters)
    dists = np.empty(max_iters)
    for t in range(1, max_iters + 1):
        beta_t = schedule.beta_at(t)
        v = _gdq_state_values(q1, q2, beta_t)
        target = mdp.reward + mdp.gamma * (mdp.transition @ v)
        if update == "simultaneous":
            q1 = target.copy()
            q2 = target.copy()
        elif t % 2 == 1:
            q1 = target.copy()
        else:
            q2 = target.copy()
        betas[t - 1] = beta_t
        dists[t - 1] = max(
            float(np.max(np.abs(q1 - q_star))), float(np.max(np.abs(q2 - q_star)))
        )
        if keep_pairs:
            pairs.append(QTablePair(q1, q2))
    if not keep_pairs:
        pairs.append(QTablePair(q1, q2))
    return GdqTrace(pairs=pairs, beta_values=betas, sup_norm_to_qstar=dists, q_star=q_star)


def random_mdp(
    n_states: int,
    n_actions: int,
    gamma: float,
    rng: np.random.Generator,
    reward_scale: float = 1.0,
) -> TabularMDP:
    """Seeded random MDP: Dirichlet-like transition rows, uniform rewards."""
    raw = rng.uniform(0.01, 1.0, size=(n_states, n_actions, n_states))
    transition = raw / raw.sum(axis=2, keepdims=True)
    reward = rng.uniform(0.0, reward_scale, size=(n_states, n_actions))
    return TabularMDP(
        n_states=n_states,
        n_actions=n_actions,
        transition=transition,
        reward=reward,
        gamma=gamma,
    )
