"""Fixed-capacity FIFO transition store with uniform minibatch sampling.

Terminal and time-limit truncation are stored as separate flags so the
critic can keep bootstrapping through truncations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Transition", "TdBatch", "ReplayBuffer"]


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool
    truncated: bool = False


@dataclass(frozen=True)
class TdBatch:
    """Aligned minibatch arrays; done flags are 1.0 only for true terminals."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    done_flags: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]


class ReplayBuffer:
    """Ring buffer over preallocated arrays; overwrites oldest entries once
    capacity is reached. Sampling is uniform with replacement."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._dones = np.zeros(capacity)
        self._truncs = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self.size

    def push(self, t: Transition):
        s = np.asarray(t.state, dtype=np.float64)
        a = np.asarray(t.action, dtype=np.float64)
        ns = np.asarray(t.next_state, dtype=np.float64)
        if s.shape != (self.state_dim,) or ns.shape != (self.state_dim,):
            raise ValueError(f"state dims {s.shape}/{ns.shape} != ({self.state_dim},)")
        if a.shape != (self.action_dim,):
            raise ValueError(f"action dim {a.shape} != ({self.action_dim},)")
        if not np.isfinite(t.reward):
            raise ValueError("reward must be finite")
        i = self._cursor
        self._states[i] = s
        self._actions[i] = a
        self._rewards[i] = t.reward
        self._next_states[i] = ns
        self._dones[i] = 1.0 if t.done else 0.0
        self._truncs[i] = bool(t.truncated)
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def get(self, i: int) -> Transition:
        """i-th oldest stored transition."""
        if not 0 <= i < self.size:
            raise IndexError(i)
        j = (self._cursor - self.size + i) % self.capacity if self.size == self.capacity else i
        return Transition(
            state=self._states[j].copy(),
            action=self._actions[j].copy(),
            reward=float(self._rewards[j]),
            next_state=self._next_states[j].copy(),
            done=bool(self._dones[j]),
            truncated=bool(self._truncs[j]),
        )

    def sample(self, batch_size: int, rng: np.random.Generator) -> TdBatch:
        if self.size < 1:
            raise ValueError("cannot sample from an empty buffer")
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        idx = rng.integers(0, self.size, size=batch_size)
        return TdBatch(
            states=self._states[idx],
            actions=self._actions[idx],
            rewards=self._rewards[idx],
            next_states=self._next_states[idx],
            done_flags=self._dones[idx],
        )

    def save(self, path: str | Path):
        np.savez(
            path,
            capacity=self.capacity,
            size=self.size,
            cursor=self._cursor,
            states=self._states[: self.size] if self.size < self.capacity else self._states,
            actions=self._actions[: self.size] if self.size < self.capacity else self._actions,
            rewards=self._rewards[: self.size] if self.size < self.capacity else self._rewards,
            next_states=self._next_states[: self.size]
            if self.size < self.capacity
            else self._next_states,
            dones=self._dones[: self.size] if self.size < self.capacity else self._dones,
            truncs=self._truncs[: self.size] if self.size < self.capacity else self._truncs,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ReplayBuffer":
        with np.load(path) as z:
            capacity = int(z["capacity"])
            size = int(z["size"])
            states = z["states"]
            buf = cls(capacity, states.shape[1], z["actions"].shape[1])
            n = states.shape[0]
            buf._states[:n] = states
            buf._actions[:n] = z["actions"]
            buf._rewards[:n] = z["rewards"]
            buf._next_states[:n] = z["next_states"]
            buf._dones[:n] = z["dones"]
            buf._truncs[:n] = z["truncs"]
            buf.size = size
            buf._cursor = int(z["cursor"])
        return buf
