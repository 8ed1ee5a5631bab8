"""The greedy actor-critic training loop: exploration-policy behavior,
FIFO replay, double-critic soft TD updates, KL policy updates, and Polyak
target tracking, with a SAC-style baseline mode that differs only in how
behavior actions are chosen."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .critic import CriticOptimizer, DoubleQ, critic_loss_and_grad, td_target
from .exploration import (
    ExplorationConfig,
    build_exploration_policy,
    kl_to_policy,
    sample_exploration_action,
)
from .neural import AdamState, Mlp, adam_step
from .policy import GaussianPolicyHead, policy_loss_and_grad
from .replay import ReplayBuffer, Transition

__all__ = [
    "TrainConfig",
    "EpochMetrics",
    "TrainResult",
    "EvalResult",
    "TrainingError",
    "init_agent",
    "train",
    "evaluate",
]

MODES = ("gac", "sac_baseline")

# fixed order of the named random sub-streams derived from the run seed
STREAM_NAMES = ("net_init", "env", "policy_noise", "exploration", "replay", "eval")


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.99
    tau: float = 0.005
    lr: float = 3e-4
    batch_size: int = 256
    buffer_capacity: int = 1_000_000
    hidden: tuple[int, ...] = (256, 256)
    alpha: float = 1.0
    exploration: ExplorationConfig = field(default_factory=ExplorationConfig)
    steps_per_epoch: int = 1000
    total_epochs: int = 100
    eval_episodes: int = 5
    seed: int = 0
    mode: str = "gac"
    warmup_steps: int = 1000
    target_samples: int = 1
    kl_log_interval: int = 25

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.lr <= 0 or self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("lr, batch_size, buffer_capacity must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.total_epochs < 0 or self.steps_per_epoch < 1:
            raise ValueError("epoch counts out of range")
        if self.warmup_steps < 0 or self.target_samples < 1:
            raise ValueError("warmup_steps/target_samples out of range")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    env_steps: int
    mean_exploration_return: float
    mean_eval_return: float
    critic_loss: float
    policy_loss: float
    beta_t: float
    pi_e_entropy: float
    pi_e_kl_to_policy: float
    wall_seconds: float


@dataclass
class TrainResult:
    metrics: list[EpochMetrics]
    policy: GaussianPolicyHead
    critic: DoubleQ
    buffer: ReplayBuffer
    config: TrainConfig


@dataclass(frozen=True)
class EvalResult:
    mean_return: float
    returns: tuple[float, ...]


class TrainingError(RuntimeError):
    """Raised when a loss goes non-finite; carries the partial state so the
    caller can dump a diagnostic checkpoint."""

    def __init__(self, message: str, result: TrainResult):
        super().__init__(message)
        self.result = result


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(STREAM_NAMES))
    return {n: np.random.default_rng(c) for n, c in zip(STREAM_NAMES, children)}


def init_agent(
    env, config: TrainConfig
) -> tuple[GaussianPolicyHead, DoubleQ, dict[str, np.random.Generator]]:
    """Networks and named random streams for a run; identical (env, config)
    always yields identical initial parameters."""
    streams = make_streams(config.seed)
    sd, ad = env.spec.state_dim, env.spec.action_dim
    trunk = Mlp.random_init([sd, *config.hidden, 2 * ad], streams["net_init"])
    policy = GaussianPolicyHead(trunk, ad)
    critic = DoubleQ.random_init(sd, ad, config.hidden, streams["net_init"], tau=config.tau)
    return policy, critic, streams


def evaluate(env, policy: GaussianPolicyHead, episodes: int, seed: int) -> EvalResult:
    """Deterministic-policy episodes (action = tanh(mu)); undiscounted
    returns. Episode i resets with seed + i."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    returns = []
    for i in range(episodes):
        state = env.reset(seed + i)
        total = 0.0
        while True:
            action = policy.deterministic_action(state)
            res = env.step(action)
            total += res.reward
            state = res.next_state
            if res.terminal or res.truncated:
                break
        returns.append(total)
    return EvalResult(mean_return=float(np.mean(returns)), returns=tuple(returns))


def train(
    env,
    config: TrainConfig,
    sinks: Sequence[Callable[[EpochMetrics], None]] = (),
    stop_condition: Callable[[EpochMetrics], bool] | None = None,
) -> TrainResult:
    """Run the full loop on one environment instance.

    Per epoch the inverse temperature is beta_base * epoch. Each
    environment step pushes one transition; once past warmup, each step is
    followed by exactly one critic + policy gradient step and a Polyak
    update. Behavior actions come from the exploration policy ("gac") or
    from the reparameterized actor ("sac_baseline"); warmup actions are
    uniform random either way. An optional stop_condition sees each epoch
    row and may end the run early (the emitted rows are unaffected).
    """
    policy, critic, streams = init_agent(env, config)
    policy_opt = AdamState.for_params(policy.trunk.params, lr=config.lr)
    critic_opt = CriticOptimizer(critic, lr=config.lr)
    sd, ad = env.spec.state_dim, env.spec.action_dim
    buffer = ReplayBuffer(config.buffer_capacity, sd, ad)
    eval_env = type(env)()

    env_rng = streams["env"]
    expl_rng = streams["exploration"]
    noise_rng = streams["policy_noise"]
    replay_rng = streams["replay"]
    eval_rng = streams["eval"]

    metrics: list[EpochMetrics] = []
    result = TrainResult(metrics=metrics, policy=policy, critic=critic, buffer=buffer, config=config)

    state = env.reset(int(env_rng.integers(2**31)))
    episode_return = 0.0
    global_step = 0

    for epoch in range(1, config.total_epochs + 1):
        t0 = time.perf_counter()
        beta_t = config.exploration.beta_at_epoch(epoch)
        episode_returns: list[float] = []
        critic_losses: list[float] = []
        policy_losses: list[float] = []
        entropies: list[float] = []
        kls: list[float] = []

        for step in range(config.steps_per_epoch):
            if global_step < config.warmup_steps:
                action = expl_rng.uniform(-1.0, 1.0, size=ad)
            elif config.mode == "gac":
                pi_e = build_exploration_policy(
                    state, policy, critic, beta_t, config.exploration, expl_rng
                )
                action = sample_exploration_action(pi_e, expl_rng)
                entropies.append(pi_e.entropy())
                if step % config.kl_log_interval == 0:
                    kls.append(kl_to_policy(pi_e, policy))
            else:
                noise = noise_rng.standard_normal(ad)
                action = policy.sample_action(state, noise).action

            res = env.step(action)
            buffer.push(
                Transition(
                    state=state,
                    action=action,
                    reward=res.reward,
                    next_state=res.next_state,
                    done=res.terminal,
                    truncated=res.truncated,
                )
            )
            episode_return += res.reward
            global_step += 1
            if res.terminal or res.truncated:
                episode_returns.append(episode_return)
                episode_return = 0.0
                state = env.reset(int(env_rng.integers(2**31)))
            else:
                state = res.next_state

            if global_step >= config.warmup_steps and buffer.size >= config.batch_size:
                batch = buffer.sample(config.batch_size, replay_rng)
                tgt_noises = noise_rng.standard_normal(
                    (config.target_samples, config.batch_size, ad)
                )
                targets = td_target(
                    critic, policy, batch, config.gamma, config.alpha, tgt_noises
                )
                c_loss, c_grads = critic_loss_and_grad(critic, batch, targets)
                critic_opt.step(c_grads)
                pi_noises = noise_rng.standard_normal((config.batch_size, ad))
                p_loss, p_grad = policy_loss_and_grad(
                    policy, critic, batch.states, pi_noises, config.alpha
                )
                adam_step(policy_opt, policy.trunk.params, p_grad)
                critic.polyak_update()
                if not (np.isfinite(c_loss) and np.isfinite(p_loss)):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch} step {step}: "
                        f"critic={c_loss} policy={p_loss}",
                        result,
                    )
                critic_losses.append(c_loss)
                policy_losses.append(p_loss)

        eval_res = evaluate(
            eval_env, policy, config.eval_episodes, int(eval_rng.integers(2**31))
        )
        if not episode_returns:
            episode_returns = [episode_return]
        row = EpochMetrics(
            epoch=epoch,
            env_steps=global_step,
            mean_exploration_return=float(np.mean(episode_returns)),
            mean_eval_return=eval_res.mean_return,
            critic_loss=float(np.mean(critic_losses)) if critic_losses else 0.0,
            policy_loss=float(np.mean(policy_losses)) if policy_losses else 0.0,
            beta_t=beta_t,
            pi_e_entropy=float(np.mean(entropies)) if entropies else 0.0,
            pi_e_kl_to_policy=float(np.mean(kls)) if kls else 0.0,
            wall_seconds=time.perf_counter() - t0,
        )
        metrics.append(row)
        for sink in sinks:
            sink(row)
        if stop_condition is not None and stop_condition(row):
            break

    return result
