"""Double Q-function over (state, action) with Polyak-averaged target
copies. The greedy composition (max) feeds exploration, the conservative
one (min) feeds targets and policy learning."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .neural import AdamState, Mlp, adam_step
from .policy import GaussianPolicyHead
from .replay import TdBatch

__all__ = ["DoubleQ", "td_target", "critic_loss_and_grad"]


class DoubleQ:
    """Two online critics plus their target copies, all sharing layer sizes.

    tau is the Polyak coefficient: after each update every target
    parameter is tau * online + (1 - tau) * target.
    """

    def __init__(self, q1: Mlp, q2: Mlp, tau: float = 0.005):
        if q1.layer_sizes != q2.layer_sizes:
            raise ValueError("q1 and q2 must share layer sizes")
        if not 0.0 < tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {tau}")
        self.q1 = q1
        self.q2 = q2
        self.target_q1 = Mlp(q1.layer_sizes, params=q1.params)
        self.target_q2 = Mlp(q2.layer_sizes, params=q2.params)
        self.tau = float(tau)

    @classmethod
    def random_init(
        cls,
        state_dim: int,
        action_dim: int,
        hidden: Sequence[int],
        rng: np.random.Generator,
        tau: float = 0.005,
    ) -> "DoubleQ":
        sizes = [state_dim + action_dim, *hidden, 1]
        return cls(Mlp.random_init(sizes, rng), Mlp.random_init(sizes, rng), tau=tau)

    @property
    def state_action_dim(self) -> int:
        return self.q1.in_dim

    def _nets(self, use_targets: bool) -> tuple[Mlp, Mlp]:
        return (self.target_q1, self.target_q2) if use_targets else (self.q1, self.q2)

    def _join(self, states: np.ndarray, actions: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        z = np.concatenate([states, actions], axis=1)
        if z.shape[1] != self.state_action_dim:
            raise ValueError(
                f"state+action dim {z.shape[1]} != network input {self.state_action_dim}"
            )
        return z

    def both_batch(
        self, states: np.ndarray, actions: np.ndarray, use_targets: bool = False
    ) -> tuple[np.ndarray, np.ndarray]:
        z = self._join(states, actions)
        n1, n2 = self._nets(use_targets)
        return n1.forward_batch(z)[:, 0], n2.forward_batch(z)[:, 0]

    def q_min_batch(
        self, states: np.ndarray, actions: np.ndarray, use_targets: bool = False
    ) -> np.ndarray:
        v1, v2 = self.both_batch(states, actions, use_targets)
        return np.minimum(v1, v2)

    def q_max_batch(
        self, states: np.ndarray, actions: np.ndarray, use_targets: bool = False
    ) -> np.ndarray:
        v1, v2 = self.both_batch(states, actions, use_targets)
        return np.maximum(v1, v2)

    def q_min(self, state, action, use_targets: bool = False) -> float:
        return float(self.q_min_batch(state, action, use_targets)[0])

    def q_max(self, state, action, use_targets: bool = False) -> float:
        return float(self.q_max_batch(state, action, use_targets)[0])

    def q_min_with_action_grad(
        self, states: np.ndarray, actions: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample conservative value and its gradient with respect to
        the action inputs (through the minimizing network; ties pick q1)."""
        z = self._join(states, actions)
        ones = np.ones((z.shape[0], 1))
        y1, tape1 = self.q1.forward_tape(z)
        y2, tape2 = self.q2.forward_tape(z)
        _, in1 = self.q1.backward_tape(tape1, ones)
        _, in2 = self.q2.backward_tape(tape2, ones)
        take1 = (y1[:, 0] <= y2[:, 0])[:, None]
        input_grad = np.where(take1, in1, in2)
        state_dim = z.shape[1] - np.atleast_2d(actions).shape[1]
        return np.minimum(y1[:, 0], y2[:, 0]), input_grad[:, state_dim:]

    def polyak_update(self):
        """Blend online parameters into the target copies elementwise."""
        t = self.tau
        self.target_q1.params *= 1.0 - t
        self.target_q1.params += t * self.q1.params
        self.target_q2.params *= 1.0 - t
        self.target_q2.params += t * self.q2.params


def td_target(
    critic: DoubleQ,
    policy: GaussianPolicyHead,
    batch: TdBatch,
    gamma: float,
    alpha: float,
    noises: np.ndarray,
) -> np.ndarray:
    """Soft one-step targets r + (1 - done) * gamma * (Qmin' - alpha*logpi').

    Next actions are fresh policy samples at the next states; the
    conservative value comes from the TARGET networks. Targets are plain
    numbers to the critic loss (no gradient flows through them).
    """
    noises = np.asarray(noises, dtype=np.float64)
    if noises.ndim == 2:
        noises = noises[None, ...]
    vals = np.zeros(len(batch))
    for k in range(noises.shape[0]):
        a_next, logp_next, _ = policy.sample_batch(batch.next_states, noises[k])
        q_next = critic.q_min_batch(batch.next_states, a_next, use_targets=True)
        vals += q_next - alpha * logp_next
    vals /= noises.shape[0]
    target = batch.rewards + (1.0 - batch.done_flags) * gamma * vals
    if not np.all(np.isfinite(target)):
        raise ValueError("non-finite TD target")
    return target


def critic_loss_and_grad(
    critic: DoubleQ, batch: TdBatch, targets: np.ndarray
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Mean over both networks and the batch of half squared residuals,
    with flat parameter gradients for each online network."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (len(batch),):
        raise ValueError("targets length mismatch")
    z = critic._join(batch.states, batch.actions)
    n = len(batch)
    y1, tape1 = critic.q1.forward_tape(z)
    y2, tape2 = critic.q2.forward_tape(z)
    r1 = y1[:, 0] - targets
    r2 = y2[:, 0] - targets
    loss = float((np.dot(r1, r1) + np.dot(r2, r2)) / (4.0 * n))
    g1, _ = critic.q1.backward_tape(tape1, (r1 / (2.0 * n))[:, None])
    g2, _ = critic.q2.backward_tape(tape2, (r2 / (2.0 * n))[:, None])
    return loss, (g1, g2)


class CriticOptimizer:
    """Adam state for both online critics."""

    def __init__(self, critic: DoubleQ, lr: float = 3e-4):
        self.critic = critic
        self.opt1 = AdamState.for_params(critic.q1.params, lr=lr)
        self.opt2 = AdamState.for_params(critic.q2.params, lr=lr)

    def step(self, grads: tuple[np.ndarray, np.ndarray]):
        adam_step(self.opt1, self.critic.q1.params, grads[0])
        adam_step(self.opt2, self.critic.q2.params, grads[1])
