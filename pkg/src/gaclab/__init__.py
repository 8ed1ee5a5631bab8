"""Greedy actor-critic toolkit: greedy-Q softmax exploration over double
critics, conservative-Q policy learning, and the numerical and tabular
harnesses that verify the operator machinery."""

__version__ = "0.1.0"

from .agent import EpochMetrics, TrainConfig, TrainResult, evaluate, train
from .critic import DoubleQ, critic_loss_and_grad, td_target
from .envs import make_env
from .exploration import ExplorationConfig, build_exploration_policy, sample_exploration_action
from .math_ops import gdq, log_sum_exp, softmax_mean, softmax_weights
from .neural import AdamState, Mlp, adam_step, finite_difference_check
from .policy import GaussianPolicyHead, policy_loss_and_grad
from .replay import ReplayBuffer, Transition
from .tabular import BetaSchedule, TabularMDP, gdq_value_iteration, value_iteration_oracle

__all__ = [
    "__version__",
    "EpochMetrics",
    "TrainConfig",
    "TrainResult",
    "train",
    "evaluate",
    "DoubleQ",
    "critic_loss_and_grad",
    "td_target",
    "make_env",
    "ExplorationConfig",
    "build_exploration_policy",
    "sample_exploration_action",
    "gdq",
    "log_sum_exp",
    "softmax_mean",
    "softmax_weights",
    "AdamState",
    "Mlp",
    "adam_step",
    "finite_difference_check",
    "GaussianPolicyHead",
    "policy_loss_and_grad",
    "ReplayBuffer",
    "Transition",
    "BetaSchedule",
    "TabularMDP",
    "gdq_value_iteration",
    "value_iteration_oracle",
]
