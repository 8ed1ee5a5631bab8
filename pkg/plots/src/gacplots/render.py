"""Render harness CSVs into raster figures.

Input schemas (column names and order are the contract; unknown extra
columns are ignored):

  curves       metrics.csv files, one per seed:
               epoch,env_steps,mean_exploration_return,mean_eval_return,
               critic_loss,policy_loss,beta_t,pi_e_entropy,pi_e_kl_to_policy
  sweep        sweep.csv:
               axis,value,n_runs,mean_final_eval_return,
               std_final_eval_return,mean_wall_seconds,failed_runs
  convergence  trace CSVs: iteration,beta_t,sup_norm_to_qstar,max_q1,max_q2
  surface      qsurface CSV:
               resolution,which,probe_state,row,col,action_0,action_1,q

Rendering is read-only and deterministic: fixed figure geometry, no
timestamps or toolchain strings embedded in the image.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PLOT_KINDS = ("curves", "sweep", "convergence", "surface")

_SCHEMAS = {
    "curves": [
        "epoch",
        "env_steps",
        "mean_exploration_return",
        "mean_eval_return",
        "critic_loss",
        "policy_loss",
        "beta_t",
        "pi_e_entropy",
        "pi_e_kl_to_policy",
    ],
    "sweep": [
        "axis",
        "value",
        "n_runs",
        "mean_final_eval_return",
        "std_final_eval_return",
        "mean_wall_seconds",
        "failed_runs",
    ],
    "convergence": ["iteration", "beta_t", "sup_norm_to_qstar", "max_q1", "max_q2"],
    "surface": [
        "resolution",
        "which",
        "probe_state",
        "row",
        "col",
        "action_0",
        "action_1",
        "q",
    ],
}

_SAVE_OPTS = dict(dpi=110, metadata={"Software": None})


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class PlotJob:
    inputs: tuple[Path, ...]
    kind: str
    output: Path
    smooth: int | None = None

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"kind must be one of {PLOT_KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _read_csv(path: Path, kind: str) -> dict[str, list[str]]:
    with open(path, encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        required = _SCHEMAS[kind]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: not a {kind} CSV; missing columns {missing}, got {header}"
            )
        columns: dict[str, list[str]] = {c: [] for c in header}
        for row in reader:
            for c, v in zip(header, row):
                columns[c].append(v)
    return columns


def _floats(columns: dict[str, list[str]], name: str) -> np.ndarray:
    return np.array([float(v) for v in columns[name]])


def _smooth(y: np.ndarray, window: int | None) -> np.ndarray:
    if not window or window <= 1 or y.size < 2:
        return y
    kernel = np.ones(min(window, y.size)) / min(window, y.size)
    return np.convolve(y, kernel, mode="valid")


def _render_curves(job: PlotJob) -> plt.Figure:
    runs = [_read_csv(p, "curves") for p in job.inputs]
    evals = [_floats(c, "mean_eval_return") for c in runs]
    expls = [_floats(c, "mean_exploration_return") for c in runs]
    n = min(e.size for e in evals)
    epochs = _floats(runs[0], "epoch")[:n]
    ev = np.stack([e[:n] for e in evals])
    ex = np.stack([e[:n] for e in expls])

    fig, ax = plt.subplots(figsize=(7, 4.5))
    mean, std = ev.mean(axis=0), ev.std(axis=0)
    if job.smooth:
        sm_epochs = epochs[: _smooth(mean, job.smooth).size]
        mean, std = _smooth(mean, job.smooth), _smooth(std, job.smooth)
        lo_band = _smooth(ev.min(axis=0), job.smooth)
        hi_band = _smooth(ev.max(axis=0), job.smooth)
    else:
        sm_epochs = epochs
        lo_band, hi_band = ev.min(axis=0), ev.max(axis=0)
    ax.fill_between(sm_epochs, lo_band, hi_band, alpha=0.15, color="C0",
                    label="seed min/max")
    ax.fill_between(sm_epochs, mean - std, mean + std, alpha=0.3, color="C0",
                    label="mean +- stddev")
    ax.plot(sm_epochs, mean, color="C0", label=f"evaluation ({len(runs)} runs)")
    ax.plot(epochs, ex.mean(axis=0), color="C1", linestyle="--",
            label="exploration (mean)")
    ax.set_xlabel("epoch")
    ax.set_ylabel("episode return")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.3)
    return fig


def _render_sweep(job: PlotJob) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in job.inputs:
        cols = _read_csv(path, "sweep")
        values = _floats(cols, "value")
        mean = _floats(cols, "mean_final_eval_return")
        std = _floats(cols, "std_final_eval_return")
        axis_name = cols["axis"][0] if cols["axis"] else "value"
        order = np.argsort(values)
        ax.errorbar(values[order], mean[order], yerr=std[order], marker="o",
                    capsize=3, label=axis_name)
    ax.set_xlabel("swept value")
    ax.set_ylabel("final evaluation return")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return fig


def _render_convergence(job: PlotJob) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in job.inputs:
        cols = _read_csv(path, "convergence")
        it = _floats(cols, "iteration")
        dist = _floats(cols, "sup_norm_to_qstar")
        ax.plot(it, np.maximum(dist, 1e-300), label=path.stem)
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup-norm distance to Q*")
    if len(job.inputs) <= 12:
        ax.legend(fontsize=7)
    ax.grid(alpha=0.3, which="both")
    return fig


def _count_peaks(grid: np.ndarray) -> int:
    c = grid[1:-1, 1:-1]
    peaks = (
        (c > grid[:-2, 1:-1])
        & (c > grid[2:, 1:-1])
        & (c > grid[1:-1, :-2])
        & (c > grid[1:-1, 2:])
    )
    return int(peaks.sum())


def _render_surface(job: PlotJob) -> plt.Figure:
    cols = _read_csv(job.inputs[0], "surface")
    res = int(cols["resolution"][0])
    which = cols["which"][0]
    grid = np.empty((res, res))
    rows = _floats(cols, "row").astype(int)
    cs = _floats(cols, "col").astype(int)
    grid[rows, cs] = _floats(cols, "q")
    axis = np.linspace(-1.0, 1.0, res)
    peaks = _count_peaks(grid)

    fig = plt.figure(figsize=(10, 4.5))
    ax0 = fig.add_subplot(1, 2, 1)
    im = ax0.imshow(
        grid.T, origin="lower", extent=(-1, 1, -1, 1), aspect="equal", cmap="viridis"
    )
    fig.colorbar(im, ax=ax0, shrink=0.85)
    ax0.set_xlabel("action[0]")
    ax0.set_ylabel("action[1]")
    ax0.set_title(f"{which} heatmap ({peaks} local maxima)", fontsize=10)

    ax1 = fig.add_subplot(1, 2, 2, projection="3d")
    a0, a1 = np.meshgrid(axis, axis, indexing="ij")
    stride = max(1, res // 100)
    ax1.plot_surface(
        a0[::stride, ::stride],
        a1[::stride, ::stride],
        grid[::stride, ::stride],
        cmap="viridis",
        linewidth=0,
        antialiased=False,
    )
    ax1.set_xlabel("action[0]")
    ax1.set_ylabel("action[1]")
    ax1.set_title(f"{which} surface", fontsize=10)
    return fig


_RENDERERS = {
    "curves": _render_curves,
    "sweep": _render_sweep,
    "convergence": _render_convergence,
    "surface": _render_surface,
}


def render(job: PlotJob) -> Path:
    """Render one job to its output path; returns the path written."""
    fig = _RENDERERS[job.kind](job)
    job.output.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(job.output, **_SAVE_OPTS)
    finally:
        plt.close(fig)
    return job.output


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gacplots-render", description="render gaclab CSVs into figures"
    )
    parser.add_argument("--kind", choices=PLOT_KINDS, required=True)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--smooth", type=int, default=None,
                        help="moving-average window for curves")
    args = parser.parse_args(argv)
    job = PlotJob(
        inputs=tuple(Path(p) for p in args.inputs),
        kind=args.kind,
        output=Path(args.out),
        smooth=args.smooth,
    )
    try:
        out = render(job)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
