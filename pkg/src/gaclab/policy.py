"""Squashed-Gaussian actor: state -> (mean, stddev), tanh-squashed
reparameterized sampling, stable log-densities, and the pathwise gradient
of the KL policy objective (entropy-weighted log-density minus the
conservative critic value)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .neural import Mlp, mlp_from_bytes, mlp_to_bytes

__all__ = [
    "GaussianPolicyHead",
    "SampledAction",
    "policy_loss_and_grad",
    "save_policy",
    "load_policy",
]

POLICY_MAGIC = b"GACPOL1\n"
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def _log1m_tanh_sq(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), computed without forming tanh(u)."""
    return 2.0 * (np.log(2.0) - u - _softplus(-2.0 * u))


@dataclass(frozen=True)
class SampledAction:
    """One reparameterized draw: squashed action, its log-density, and the
    latent Gaussian value it was squashed from."""

    action: np.ndarray
    log_prob: float
    pre_squash: np.ndarray


class GaussianPolicyHead:
    """Trunk network emitting per-dimension mean and log-stddev; stddev is
    clamped in log space, actions are tanh-squashed into (-1, 1)^d."""

    def __init__(
        self,
        trunk: Mlp,
        action_dim: int,
        log_std_bounds: tuple[float, float] = (-20.0, 2.0),
    ):
        if trunk.out_dim != 2 * action_dim:
            raise ValueError(
                f"trunk output dim {trunk.out_dim} != 2 * action_dim {2 * action_dim}"
            )
        if not log_std_bounds[0] < log_std_bounds[1]:
            raise ValueError("log_std_bounds must be an increasing pair")
        self.trunk = trunk
        self.action_dim = action_dim
        self.log_std_bounds = (float(log_std_bounds[0]), float(log_std_bounds[1]))

    @property
    def state_dim(self) -> int:
        return self.trunk.in_dim

    def _heads(self, out: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d = self.action_dim
        mu = out[:, :d]
        raw = out[:, d:]
        log_std = np.clip(raw, *self.log_std_bounds)
        return mu, raw, log_std

    def mean_std(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batched (mu, sigma) at the given states."""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        mu, _, log_std = self._heads(self.trunk.forward_batch(states))
        return mu, np.exp(log_std)

    def deterministic_action(self, state: np.ndarray) -> np.ndarray:
        """Mode of the squashed policy, tanh(mu); used for evaluation."""
        mu, _ = self.mean_std(np.asarray(state, dtype=np.float64)[None, :])
        return np.tanh(mu[0])

    def sample_batch(
        self, states: np.ndarray, noises: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Squash mu + sigma*noise; returns (actions, log_probs, pre_squash)."""
        states = np.asarray(states, dtype=np.float64)
        noises = np.asarray(noises, dtype=np.float64)
        mu, sigma = self.mean_std(states)
        if noises.shape != mu.shape:
            raise ValueError(f"noise shape {noises.shape} != action shape {mu.shape}")
        u = mu + sigma * noises
        actions = np.tanh(u)
        log_probs = (
            np.sum(-0.5 * noises**2 - np.log(sigma), axis=1)
            - self.action_dim * _HALF_LOG_2PI
            - np.sum(_log1m_tanh_sq(u), axis=1)
        )
        return actions, log_probs, u

    def sample_action(self, state: np.ndarray, noise: np.ndarray) -> SampledAction:
        state = np.asarray(state, dtype=np.float64)
        if not np.all(np.isfinite(state)):
            raise ValueError("state contains non-finite entries")
        a, lp, u = self.sample_batch(state[None, :], np.asarray(noise, dtype=np.float64)[None, :])
        return SampledAction(action=a[0], log_prob=float(lp[0]), pre_squash=u[0])

    def log_prob_batch(self, states: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """Log-density of given squashed actions under the current policy."""
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        if np.any(np.abs(actions) >= 1.0 - 1e-6):
            raise ValueError("actions must lie strictly inside (-1, 1) with 1e-6 margin")
        mu, sigma = self.mean_std(states)
        u = 0.5 * (np.log1p(actions) - np.log1p(-actions))
        eps = (u - mu) / sigma
        return (
            np.sum(-0.5 * eps**2 - np.log(sigma), axis=1)
            - self.action_dim * _HALF_LOG_2PI
            - np.sum(_log1m_tanh_sq(u), axis=1)
        )

    def log_prob(self, state: np.ndarray, action: np.ndarray) -> float:
        return float(
            self.log_prob_batch(
                np.asarray(state, dtype=np.float64)[None, :],
                np.asarray(action, dtype=np.float64)[None, :],
            )[0]
        )


def policy_loss_and_grad(
    policy: GaussianPolicyHead,
    critic,
    states: np.ndarray,
    noises: np.ndarray,
    alpha: float,
) -> tuple[float, np.ndarray]:
    """Loss mean_b[alpha * log pi(a_b|s_b) - Qmin(s_b, a_b)] at a_b squashed
    from fixed noises, with the pathwise gradient through both the
    log-density and the critic's action input.

    `critic` needs a q_min_with_action_grad(states, actions) method
    returning per-sample conservative values and their action gradients.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    noises = np.atleast_2d(np.asarray(noises, dtype=np.float64))
    if states.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    out, tape = policy.trunk.forward_tape(states)
    mu, raw, log_std = policy._heads(out)
    sigma = np.exp(log_std)
    u = mu + sigma * noises
    actions = np.tanh(u)
    log_probs = (
        np.sum(-0.5 * noises**2 - log_std, axis=1)
        - policy.action_dim * _HALF_LOG_2PI
        - np.sum(_log1m_tanh_sq(u), axis=1)
    )
    q_min, dq_da = critic.q_min_with_action_grad(states, actions)
    if not (np.all(np.isfinite(q_min)) and np.all(np.isfinite(dq_da))):
        raise ValueError("critic produced non-finite values")
    batch = states.shape[0]
    loss = float(np.mean(alpha * log_probs - q_min))

    # d/du of [alpha*logp - qmin]: the squash correction contributes
    # 2*alpha*tanh(u); the critic contributes -dq/da * (1 - a^2)
    g_u = (2.0 * alpha * actions - dq_da * (1.0 - actions**2)) / batch
    g_mu = g_u
    g_log_std = (-alpha / batch) + g_u * sigma * noises
    lo, hi = policy.log_std_bounds
    g_log_std = np.where((raw > lo) & (raw < hi), g_log_std, 0.0)
    head_grad = np.concatenate([g_mu, g_log_std], axis=1)
    param_grad, _ = policy.trunk.backward_tape(tape, head_grad)
    return loss, param_grad


def save_policy(path: str | Path, policy: GaussianPolicyHead):
    """Policy blob: policy magic, action_dim (u32 LE), log-std bounds
    (two f64 LE), then the trunk in the network blob layout."""
    header = b"".join(
        [
            POLICY_MAGIC,
            np.asarray([policy.action_dim], dtype="<u4").tobytes(),
            np.asarray(policy.log_std_bounds, dtype="<f8").tobytes(),
        ]
    )
    Path(path).write_bytes(header + mlp_to_bytes(policy.trunk))


def load_policy(path: str | Path) -> GaussianPolicyHead:
    raw = Path(path).read_bytes()
    if raw[: len(POLICY_MAGIC)] != POLICY_MAGIC:
        raise ValueError(f"{path} is not a policy checkpoint (bad magic)")
    off = len(POLICY_MAGIC)
    (action_dim,) = np.frombuffer(raw, dtype="<u4", count=1, offset=off)
    off += 4
    lo, hi = np.frombuffer(raw, dtype="<f8", count=2, offset=off)
    off += 16
    trunk, _ = mlp_from_bytes(raw, off)
    return GaussianPolicyHead(trunk, int(action_dim), (float(lo), float(hi)))
