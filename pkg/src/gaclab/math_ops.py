"""Numerically stable scalar primitives: log-sum-exp, softmax weights and
means, entropy, and the greedy/conservative softmax backup value.

All functions accept 1-D sequences of finite reals and use the
max-subtraction trick, so they stay finite for |x| up to ~1e6 and
inverse temperatures up to ~1e3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ScoredActions",
    "SoftmaxWeights",
    "BoundTableRow",
    "log_sum_exp",
    "softmax_weights",
    "softmax_mean",
    "entropy",
    "gdq",
    "bound_table",
]


def _as_finite_vector(x, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class ScoredActions:
    """Greedy (max) and conservative (min) action values on a finite
    candidate set, aligned index by index."""

    q_max_values: np.ndarray
    q_min_values: np.ndarray

    def __post_init__(self):
        qmax = _as_finite_vector(self.q_max_values, "q_max_values")
        qmin = _as_finite_vector(self.q_min_values, "q_min_values")
        if qmax.shape != qmin.shape:
            raise ValueError(
                f"length mismatch: {qmax.shape[0]} greedy vs {qmin.shape[0]} conservative values"
            )
        if not np.all(qmax >= qmin):
            raise ValueError("q_max_values must dominate q_min_values elementwise")
        object.__setattr__(self, "q_max_values", qmax)
        object.__setattr__(self, "q_min_values", qmin)


@dataclass(frozen=True)
class SoftmaxWeights:
    """A normalized softmax distribution together with the inverse
    temperature it was built at."""

    weights: np.ndarray
    beta: float

    def __post_init__(self):
        w = _as_finite_vector(self.weights, "weights")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1 within 1e-12")
        object.__setattr__(self, "weights", w)


def log_sum_exp(x, beta: float) -> float:
    """(1/beta) * log sum_i exp(beta * x_i), shifted by max(x) for stability.

    Requires beta > 0. The result always lies in [max(x), max(x) + log(n)/beta].
    """
    v = _as_finite_vector(x)
    beta = float(beta)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    m = float(v.max())
    return m + float(np.log(np.sum(np.exp(beta * (v - m))))) / beta


def softmax_weights(x, beta: float) -> SoftmaxWeights:
    """Softmax distribution exp(beta*x_i) / sum_j exp(beta*x_j).

    beta = 0 degenerates to the uniform distribution; ties at the maximum
    share weight equally as beta grows.
    """
    v = _as_finite_vector(x)
    beta = float(beta)
    if beta < 0 or not np.isfinite(beta):
        raise ValueError(f"beta must be finite and nonnegative, got {beta}")
    z = beta * v
    z -= z.max()
    e = np.exp(z)
    w = e / e.sum()
    # exact renormalization so the sum-to-one invariant holds bit-tight
    w /= w.sum()
    return SoftmaxWeights(weights=w, beta=beta)


def softmax_mean(x, beta: float) -> float:
    """Softmax-weighted mean sum_i p_i x_i; lies in [min(x), max(x)]."""
    v = _as_finite_vector(x)
    w = softmax_weights(v, beta)
    return float(np.dot(w.weights, v))


def entropy(w: SoftmaxWeights) -> float:
    """Shannon entropy sum_i -p_i log p_i in nats, with 0*log(0) = 0."""
    p = w.weights
    nz = p[p > 0.0]
    return float(-np.dot(nz, np.log(nz)))


def gdq(scored: ScoredActions, beta: float) -> float:
    """Conservative values averaged under the softmax of the greedy values.

    Weighting by the greedy (max) estimate while averaging the conservative
    (min) estimate keeps the backup between min(q_min) and max(q_min).
    """
    w = softmax_weights(scored.q_max_values, beta)
    return float(np.dot(w.weights, scored.q_min_values))


@dataclass(frozen=True)
class BoundTableRow:
    """One row of the lse/sm/entropy identity table for a random draw."""

    n: int
    beta: float
    lse: float
    sm: float
    entropy_term: float
    max: float
    values: np.ndarray = field(repr=False)


def bound_table(n: int, beta: float, seed: int) -> BoundTableRow:
    """Draw n integers uniformly from [1, 1000] and evaluate lse, sm,
    H/beta and the maximum on the draw.

    The identity lse - sm = H/beta holds to rounding for every draw, and
    H/beta is capped by log(n)/beta regardless of the values.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    values = rng.integers(1, 1001, size=n).astype(np.float64)
    lse = log_sum_exp(values, beta)
    w = softmax_weights(values, beta)
    sm = float(np.dot(w.weights, values))
    h = entropy(w)
    return BoundTableRow(
        n=int(n),
        beta=float(beta),
        lse=lse,
        sm=sm,
        entropy_term=h / float(beta),
        max=float(values.max()),
        values=values,
    )
