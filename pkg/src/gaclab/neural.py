"""Dense networks with rectified-linear hidden layers, hand-rolled
reverse-mode gradients (with respect to parameters and inputs), an Adam
optimizer, and a finite-difference gradient checker.

Parameters live in one flat float64 vector. Layout, layer by layer:
weight matrix of shape (fan_in, fan_out) in row-major order, then the
bias vector of length fan_out. Checkpoint blobs serialize exactly this
vector, little-endian, behind a fixed header.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Mlp",
    "AdamState",
    "adam_step",
    "finite_difference_check",
    "mlp_to_bytes",
    "mlp_from_bytes",
    "save_mlp",
    "load_mlp",
    "CHECKPOINT_MAGIC",
]

CHECKPOINT_MAGIC = b"GACNET1\n"


def _param_count(layer_sizes: Sequence[int]) -> int:
    return sum((fi + 1) * fo for fi, fo in zip(layer_sizes[:-1], layer_sizes[1:]))


class Mlp:
    """Multilayer perceptron, ReLU on hidden layers, identity output.

    The rectifier uses subgradient 0 at exactly zero pre-activation, so
    forward and backward are deterministic functions of (params, input).
    """

    def __init__(self, layer_sizes: Sequence[int], params: np.ndarray | None = None):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"layer_sizes must list >= 2 positive dims, got {sizes}")
        self.layer_sizes = sizes
        n = _param_count(sizes)
        if params is None:
            self.params = np.zeros(n, dtype=np.float64)
        else:
            p = np.asarray(params, dtype=np.float64)
            if p.shape != (n,):
                raise ValueError(f"expected {n} parameters, got shape {p.shape}")
            self.params = p.copy()
        self._rebuild_views()

    def _rebuild_views(self):
        self._weights = []
        self._biases = []
        off = 0
        for fi, fo in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            self._weights.append(self.params[off : off + fi * fo].reshape(fi, fo))
            off += fi * fo
            self._biases.append(self.params[off : off + fo])
            off += fo

    @property
    def n_params(self) -> int:
        return self.params.size

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    @classmethod
    def random_init(cls, layer_sizes: Sequence[int], rng: np.random.Generator) -> "Mlp":
        """Scaled-uniform init: weights and biases in +-1/sqrt(fan_in)."""
        net = cls(layer_sizes)
        for w, b, fi in zip(net._weights, net._biases, net.layer_sizes[:-1]):
            bound = 1.0 / np.sqrt(fi)
            w[...] = rng.uniform(-bound, bound, size=w.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)
        return net

    def set_params(self, params: np.ndarray):
        p = np.asarray(params, dtype=np.float64)
        if p.shape != self.params.shape:
            raise ValueError("parameter length mismatch")
        self.params[...] = p

    def _check_input(self, x: np.ndarray, batched: bool) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        want = 2 if batched else 1
        if x.ndim != want or x.shape[-1] != self.in_dim:
            raise ValueError(
                f"input shape {x.shape} incompatible with input dim {self.in_dim}"
            )
        return x

    def forward(self, x) -> np.ndarray:
        x = self._check_input(x, batched=False)
        return self.forward_batch(x[None, :])[0]

    def forward_batch(self, x) -> np.ndarray:
        x = self._check_input(x, batched=True)
        h = x
        last = len(self._weights) - 1
        for i, (w, b) in enumerate(zip(self._weights, self._biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
        return h

    def forward_tape(self, x) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass keeping each layer's input for reuse in backward."""
        x = self._check_input(x, batched=True)
        tape = [x]
        h = x
        last = len(self._weights) - 1
        for i, (w, b) in enumerate(zip(self._weights, self._biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
                tape.append(h)
        return h, tape

    def backward_tape(
        self, tape: list[np.ndarray], output_grad: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Reverse-mode gradients from a forward tape.

        Returns (param_grad, input_grad): param_grad is flat in the layout
        of `params`, summed over the batch; input_grad has the batch shape.
        """
        dy = np.asarray(output_grad, dtype=np.float64)
        if dy.shape != (tape[0].shape[0], self.out_dim):
            raise ValueError(
                f"output_grad shape {dy.shape} incompatible with batch "
                f"{tape[0].shape[0]} and output dim {self.out_dim}"
            )
        param_grad = np.zeros_like(self.params)
        off = self.params.size
        for i in range(len(self._weights) - 1, -1, -1):
            w = self._weights[i]
            h_in = tape[i]
            fo = w.shape[1]
            off -= fo
            param_grad[off : off + fo] = dy.sum(axis=0)
            off -= w.size
            param_grad[off : off + w.size] = (h_in.T @ dy).ravel()
            dy = dy @ w.T
            if i > 0:
                dy *= tape[i] > 0.0
        return param_grad, dy

    def backward(self, x, output_grad) -> tuple[np.ndarray, np.ndarray]:
        """Gradients for a single input vector (see backward_tape for batches)."""
        x = self._check_input(x, batched=False)
        dy = np.asarray(output_grad, dtype=np.float64)
        if dy.shape != (self.out_dim,):
            raise ValueError(f"output_grad shape {dy.shape} != ({self.out_dim},)")
        _, tape = self.forward_tape(x[None, :])
        param_grad, input_grad = self.backward_tape(tape, dy[None, :])
        return param_grad, input_grad[0]


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: np.ndarray, lr: float = 3e-4) -> "AdamState":
        return cls(m=np.zeros_like(params), v=np.zeros_like(params), lr=lr)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update, applied to params in place."""
    g = np.asarray(grad, dtype=np.float64)
    if g.shape != params.shape or state.m.shape != params.shape:
        raise ValueError("parameter / gradient / state length mismatch")
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * g
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * np.square(g)
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    params -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


def finite_difference_check(
    loss: Callable[[np.ndarray], float],
    params: np.ndarray,
    analytic_grad: np.ndarray,
    h: float = 1e-5,
    coords: Sequence[int] | None = None,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic_grad and central differences.

    Differences are taken per coordinate (optionally a random subset of
    max_coords for large parameter vectors). The error is normalized by
    the largest finite-difference component, so a gradient scaled by 2x
    reports an error near 1.
    """
    p = np.asarray(params, dtype=np.float64)
    g = np.asarray(analytic_grad, dtype=np.float64)
    if g.shape != p.shape:
        raise ValueError("analytic_grad length mismatch")
    if coords is None:
        idx = np.arange(p.size)
        if max_coords is not None and max_coords < p.size:
            if rng is None:
                rng = np.random.default_rng(0)
            idx = rng.choice(p.size, size=max_coords, replace=False)
    else:
        idx = np.asarray(coords, dtype=np.intp)
    fd = np.empty(idx.size)
    work = p.copy()
    for k, i in enumerate(idx):
        orig = work[i]
        work[i] = orig + h
        up = loss(work)
        work[i] = orig - h
        down = loss(work)
        work[i] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise ValueError("loss returned a non-finite value during differencing")
        fd[k] = (up - down) / (2.0 * h)
    scale = max(float(np.max(np.abs(fd))), 1e-12)
    return float(np.max(np.abs(fd - g[idx])) / scale)


def mlp_to_bytes(net: Mlp) -> bytes:
    """Magic, layer count, layer sizes (u32 LE), parameter count (u64 LE),
    then the flat float64 LE parameter vector."""
    parts = [
        CHECKPOINT_MAGIC,
        np.asarray([len(net.layer_sizes)], dtype="<u4").tobytes(),
        np.asarray(net.layer_sizes, dtype="<u4").tobytes(),
        np.asarray([net.n_params], dtype="<u8").tobytes(),
        net.params.astype("<f8").tobytes(),
    ]
    return b"".join(parts)


def mlp_from_bytes(raw: bytes, offset: int = 0) -> tuple[Mlp, int]:
    """Parse one network blob starting at offset; returns (net, next offset)."""
    if raw[offset : offset + len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValueError("not a network checkpoint (bad magic)")
    off = offset + len(CHECKPOINT_MAGIC)
    (n_sizes,) = np.frombuffer(raw, dtype="<u4", count=1, offset=off)
    off += 4
    sizes = np.frombuffer(raw, dtype="<u4", count=int(n_sizes), offset=off)
    off += 4 * int(n_sizes)
    (count,) = np.frombuffer(raw, dtype="<u8", count=1, offset=off)
    off += 8
    params = np.frombuffer(raw, dtype="<f8", count=int(count), offset=off)
    off += 8 * int(count)
    expected = _param_count([int(s) for s in sizes])
    if int(count) != expected:
        raise ValueError(f"parameter count {count} != expected {expected}")
    net = Mlp([int(s) for s in sizes], params=np.asarray(params, dtype=np.float64))
    return net, off


def save_mlp(path: str | Path, net: Mlp):
    Path(path).write_bytes(mlp_to_bytes(net))


def load_mlp(path: str | Path) -> Mlp:
    net, _ = mlp_from_bytes(Path(path).read_bytes())
    return net
