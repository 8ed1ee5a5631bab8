"""Deterministic, seedable desk-scale continuous-control environments
behind one interface: reset(seed) -> state, step(action) -> StepResult.

Actions live in [-1, 1]^d everywhere; out-of-range actions are clipped
defensively with a logged warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnvSpec",
    "StepResult",
    "PendulumEnv",
    "PointMassEnv",
    "BanditEnv",
    "make_env",
    "ENV_NAMES",
    "bandit_taller_mode_reward",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnvSpec:
    state_dim: int
    action_dim: int
    episode_length: int
    reward_bounds: tuple[float, float]


@dataclass(frozen=True)
class StepResult:
    next_state: np.ndarray
    reward: float
    terminal: bool
    truncated: bool


def _checked_action(action, dim: int, env_name: str) -> np.ndarray:
    a = np.asarray(action, dtype=np.float64)
    if a.shape != (dim,):
        raise ValueError(f"{env_name}: action shape {a.shape} != ({dim},)")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{env_name}: non-finite action")
    if np.any(np.abs(a) > 1.0):
        log.warning("%s: action %s outside [-1, 1], clipping", env_name, a)
        a = np.clip(a, -1.0, 1.0)
    return a


class PendulumEnv:
    """Torque-limited swing-up. Angle 0 is upright; reward penalizes the
    wrapped angle, angular velocity, and effort on the normalized action.

    Dynamics: theta_dd = (3g / 2L) sin(theta) + (3 / (m L^2)) * u_max * a,
    integrated semi-implicitly (velocity first) at dt = 0.05, with the
    angular velocity clipped to [-8, 8].
    """

    GRAVITY = 10.0
    MASS = 1.0
    LENGTH = 1.0
    MAX_TORQUE = 2.0
    DT = 0.05
    MAX_SPEED = 8.0

    spec = EnvSpec(
        state_dim=3,
        action_dim=1,
        episode_length=1000,
        reward_bounds=(-(np.pi**2 + 0.1 * 64.0 + 0.001), 0.0),
    )

    def __init__(self):
        self._theta = 0.0
        self._theta_dot = 0.0
        self._steps = 0
        self._rng = np.random.default_rng(0)

    def _obs(self) -> np.ndarray:
        return np.array([np.cos(self._theta), np.sin(self._theta), self._theta_dot])

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.default_rng(seed)
        self._theta = float(self._rng.uniform(-np.pi, np.pi))
        self._theta_dot = float(self._rng.uniform(-1.0, 1.0))
        self._steps = 0
        return self._obs()

    @property
    def internal_state(self) -> tuple[float, float]:
        return self._theta, self._theta_dot

    def set_internal_state(self, theta: float, theta_dot: float):
        self._theta = float(theta)
        self._theta_dot = float(theta_dot)

    def step(self, action) -> StepResult:
        a = _checked_action(action, 1, "pendulum")
        torque = self.MAX_TORQUE * float(a[0])
        g, m, length = self.GRAVITY, self.MASS, self.LENGTH
        accel = (3.0 * g / (2.0 * length)) * np.sin(self._theta) + (
            3.0 / (m * length**2)
        ) * torque
        self._theta_dot = float(
            np.clip(self._theta_dot + accel * self.DT, -self.MAX_SPEED, self.MAX_SPEED)
        )
        self._theta = self._theta + self._theta_dot * self.DT
        wrapped = (self._theta + np.pi) % (2.0 * np.pi) - np.pi
        reward = -(wrapped**2 + 0.1 * self._theta_dot**2 + 0.001 * float(a[0]) ** 2)
        self._steps += 1
        truncated = self._steps >= self.spec.episode_length
        return StepResult(self._obs(), float(reward), terminal=False, truncated=truncated)


class PointMassEnv:
    """Planar double integrator steered toward the origin. Reward is the
    negative distance to the goal minus a small effort penalty; positions
    and velocities are kept in boxes so rewards stay bounded."""

    DT = 0.05
    ACCEL = 2.0
    POS_BOUND = 5.0
    VEL_BOUND = 5.0

    spec = EnvSpec(
        state_dim=4,
        action_dim=2,
        episode_length=1000,
        reward_bounds=(-(np.sqrt(2.0) * 5.0 + 0.02), 0.0),
    )

    def __init__(self):
        self._pos = np.zeros(2)
        self._vel = np.zeros(2)
        self._steps = 0
        self._rng = np.random.default_rng(0)

    def _obs(self) -> np.ndarray:
        return np.concatenate([self._pos, self._vel])

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.default_rng(seed)
        self._pos = self._rng.uniform(-4.0, 4.0, size=2)
        self._vel = np.zeros(2)
        self._steps = 0
        return self._obs()

    def step(self, action) -> StepResult:
        a = _checked_action(action, 2, "pointmass")
        self._vel = np.clip(self._vel + self.ACCEL * a * self.DT, -self.VEL_BOUND, self.VEL_BOUND)
        self._pos = np.clip(self._pos + self._vel * self.DT, -self.POS_BOUND, self.POS_BOUND)
        reward = -(float(np.linalg.norm(self._pos)) + 0.01 * float(a @ a))
        self._steps += 1
        truncated = self._steps >= self.spec.episode_length
        return StepResult(self._obs(), float(reward), terminal=False, truncated=truncated)


# Bandit mixture parameters, fixed: a taller mode in the first quadrant
# and a shorter, slightly wider one in the third, nearer the origin, with
# a policy initialized near zero sitting between them. The taller mode
# carries the larger integrated density mass, so value-guided wide
# sampling can reach it, while the shorter mode is what a narrow sampling
# box around the initial policy sees first.
BANDIT_CENTERS = (np.array([0.6, 0.6]), np.array([-0.5, -0.5]))
BANDIT_WEIGHTS = (1.0, 0.6)
BANDIT_SIGMAS = (0.15, 0.18)


def _bandit_reward(action: np.ndarray) -> float:
    r = 0.0
    for c, w, s in zip(BANDIT_CENTERS, BANDIT_WEIGHTS, BANDIT_SIGMAS):
        d = action - c
        r += w * np.exp(-float(d @ d) / (2.0 * s * s))
    return r


def bandit_taller_mode_reward() -> float:
    """Mixture value at the taller mode's center, evaluated analytically."""
    return _bandit_reward(BANDIT_CENTERS[0])


class BanditEnv:
    """One-step two-dimensional bandit whose reward surface is a mixture of
    two unequal Gaussian bumps; the optimal Q-surface is multi-modal."""

    spec = EnvSpec(
        state_dim=2,
        action_dim=2,
        episode_length=1,
        reward_bounds=(0.0, BANDIT_WEIGHTS[0] + BANDIT_WEIGHTS[1]),
    )

    def __init__(self):
        self._steps = 0

    def reset(self, seed: int) -> np.ndarray:
        self._steps = 0
        return np.zeros(2)

    def step(self, action) -> StepResult:
        a = _checked_action(action, 2, "bandit2d")
        self._steps += 1
        return StepResult(np.zeros(2), _bandit_reward(a), terminal=True, truncated=False)


ENV_NAMES = ("pendulum", "pointmass", "bandit2d")


def make_env(name: str):
    if name == "pendulum":
        return PendulumEnv()
    if name == "pointmass":
        return PointMassEnv()
    if name == "bandit2d":
        return BanditEnv()
    raise ValueError(f"unknown environment {name!r}; choose from {ENV_NAMES}")
