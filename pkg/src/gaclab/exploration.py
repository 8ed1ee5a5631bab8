"""Behavior policy for exploration: a finite categorical distribution over
candidate actions sampled around the current policy and weighted by the
softmax of the greedy (max) critic values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .math_ops import SoftmaxWeights, softmax_weights

__all__ = [
    "ExplorationConfig",
    "ExplorationPolicy",
    "build_exploration_policy",
    "sample_exploration_action",
    "kl_to_policy",
]


@dataclass(frozen=True)
class ExplorationConfig:
    """Inverse-temperature base and candidate sampling geometry.

    beta grows linearly with the epoch index (index starts at 1);
    sample_range is measured in units of the policy stddev, applied in
    pre-squash space; sample_count is the number of candidates.
    """

    beta_base: float = 1.0
    sample_range: float = 7.0
    sample_count: int = 32

    def __post_init__(self):
        if self.beta_base < 0:
            raise ValueError("beta_base must be nonnegative")
        if self.sample_range <= 0:
            raise ValueError("sample_range must be positive")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")

    def beta_at_epoch(self, epoch: int) -> float:
        if epoch < 1:
            raise ValueError("epoch index starts at 1")
        return self.beta_base * epoch


@dataclass(frozen=True)
class ExplorationPolicy:
    """Candidates (squashed), their greedy critic scores, and the softmax
    weights built from those scores at the stated inverse temperature."""

    candidates: np.ndarray
    q_max_values: np.ndarray
    weights: SoftmaxWeights
    probe_state: np.ndarray
    pre_squash: np.ndarray

    def entropy(self) -> float:
        p = self.weights.weights
        nz = p[p > 0.0]
        return float(-np.dot(nz, np.log(nz)))


def build_exploration_policy(
    state: np.ndarray,
    policy,
    critic,
    beta_t: float,
    config: ExplorationConfig,
    rng: np.random.Generator,
) -> ExplorationPolicy:
    """Sample candidates uniformly in the pre-squash box
    [mu - s_r*sigma, mu + s_r*sigma], squash them, score with the greedy
    critic (online networks, one batched pass per network), and weight by
    the softmax at beta_t."""
    state = np.asarray(state, dtype=np.float64)
    mu, sigma = policy.mean_std(state[None, :])
    mu, sigma = mu[0], sigma[0]
    half = config.sample_range * sigma
    pre = rng.uniform(mu - half, mu + half, size=(config.sample_count, mu.size))
    candidates = np.tanh(pre)
    states = np.broadcast_to(state, (config.sample_count, state.size))
    q_max = critic.q_max_batch(states, candidates)
    if not np.all(np.isfinite(q_max)):
        raise ValueError("non-finite greedy Q values on exploration candidates")
    return ExplorationPolicy(
        candidates=candidates,
        q_max_values=np.asarray(q_max, dtype=np.float64),
        weights=softmax_weights(q_max, beta_t),
        probe_state=state,
        pre_squash=pre,
    )


def sample_exploration_action(pi_e: ExplorationPolicy, rng: np.random.Generator) -> np.ndarray:
    """Categorical draw over the candidates by their softmax weights."""
    i = rng.choice(pi_e.candidates.shape[0], p=pi_e.weights.weights)
    return pi_e.candidates[i].copy()


def kl_to_policy(pi_e: ExplorationPolicy, policy) -> float:
    """KL(exploration weights || policy density restricted to candidates).

    The policy's log-densities on the candidate set are renormalized over
    the candidates, making this a finite-vs-finite divergence; logged as a
    consistency diagnostic, never optimized.
    """
    # candidates can brush the (-1,1) boundary; clip inside the density guard
    acts = np.clip(pi_e.candidates, -1.0 + 2e-6, 1.0 - 2e-6)
    states = np.broadcast_to(pi_e.probe_state, (acts.shape[0], pi_e.probe_state.size))
    logp = policy.log_prob_batch(states, acts)
    logq = logp - np.max(logp)
    logq = logq - np.log(np.sum(np.exp(logq)))
    w = pi_e.weights.weights
    nz = w > 0.0
    return float(np.sum(w[nz] * (np.log(w[nz]) - logq[nz])))
