"""Run artifacts: flat key=value configs and manifests, git-style content
hashes, CSV sinks, checkpoint containers, and Q-surface grids.

CSV schemas (fixed; plotting depends on the column order):
  metrics.csv   epoch,env_steps,mean_exploration_return,mean_eval_return,
                critic_loss,policy_loss,beta_t,pi_e_entropy,pi_e_kl_to_policy
  timing.csv    epoch,wall_seconds
  qsurface.csv  resolution,which,probe_state,row,col,action_0,action_1,q
                (row-major over the action square; probe_state is
                semicolon-joined)
  trace.csv     iteration,beta_t,sup_norm_to_qstar,max_q1,max_q2
  sweep.csv     axis,value,n_runs,mean_final_eval_return,
                std_final_eval_return,mean_wall_seconds,failed_runs

Wall-clock timings live in timing.csv, never in metrics.csv, so reruns
from one manifest reproduce metrics.csv byte for byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .agent import EpochMetrics, TrainConfig
from .critic import DoubleQ
from .exploration import ExplorationConfig
from .neural import load_mlp, save_mlp
from .policy import GaussianPolicyHead, load_policy, save_policy

METRICS_COLUMNS = (
    "epoch",
    "env_steps",
    "mean_exploration_return",
    "mean_eval_return",
    "critic_loss",
    "policy_loss",
    "beta_t",
    "pi_e_entropy",
    "pi_e_kl_to_policy",
)

# manifest-only keys the config parser skips
MANIFEST_KEYS = ("run_id", "code_version", "config_hash", "seeds", "layout")


def git_blob_hash(payload: bytes) -> str:
    """sha1 over the git blob framing of the payload."""
    h = hashlib.sha1()
    h.update(b"blob %d\x00" % len(payload))
    h.update(payload)
    return h.hexdigest()


def config_to_text(env_name: str, config: TrainConfig) -> str:
    """Canonical flat key=value serialization of a run configuration."""
    d = asdict(config)
    expl = d.pop("exploration")
    lines = [f"env={env_name}"]
    for k in sorted(d):
        v = d[k]
        if k == "hidden":
            v = ",".join(str(int(h)) for h in v)
        lines.append(f"{k}={v}")
    lines.append(f"beta={expl['beta_base']}")
    lines.append(f"sample_range={expl['sample_range']}")
    lines.append(f"sample_count={expl['sample_count']}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> tuple[str, TrainConfig]:
    """Inverse of config_to_text; unknown manifest keys are ignored and
    flag-style overrides can be layered by the caller before parsing."""
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        kv[k.strip()] = v.strip()
    return config_from_mapping(kv)


def config_from_mapping(kv: dict[str, str]) -> tuple[str, TrainConfig]:
    env_name = kv.get("env", "")
    if not env_name:
        raise ValueError("config is missing the env key")
    base = TrainConfig()
    ints = {
        "batch_size",
        "buffer_capacity",
        "steps_per_epoch",
        "total_epochs",
        "eval_episodes",
        "seed",
        "warmup_steps",
        "target_samples",
        "kl_log_interval",
        "sample_count",
    }
    floats = {"gamma", "tau", "lr", "alpha", "beta", "sample_range"}
    fields: dict = {}
    expl: dict = {}
    for k, v in kv.items():
        if k in ("env",) or k in MANIFEST_KEYS:
            continue
        if k == "hidden":
            fields["hidden"] = tuple(int(s) for s in v.split(",") if s)
        elif k == "mode":
            fields["mode"] = v
        elif k == "beta":
            expl["beta_base"] = float(v)
        elif k == "sample_range":
            expl["sample_range"] = float(v)
        elif k == "sample_count":
            expl["sample_count"] = int(v)
        elif k in ints:
            fields[k] = int(v)
        elif k in floats:
            fields[k] = float(v)
        else:
            raise ValueError(f"unknown config key {k!r}")
    base_expl = base.exploration
    exploration = ExplorationConfig(
        beta_base=expl.get("beta_base", base_expl.beta_base),
        sample_range=expl.get("sample_range", base_expl.sample_range),
        sample_count=expl.get("sample_count", base_expl.sample_count),
    )
    cfg_kwargs = {**{f: getattr(base, f) for f in base.__dataclass_fields__}, **fields}
    cfg_kwargs["exploration"] = exploration
    return env_name, TrainConfig(**cfg_kwargs)


def write_manifest(run_dir: Path, env_name: str, config: TrainConfig, run_id: str):
    cfg_text = config_to_text(env_name, config)
    lines = [
        f"run_id={run_id}",
        f"code_version={__version__}",
        f"config_hash={git_blob_hash(cfg_text.encode())}",
        f"seeds={config.seed}",
        "layout=manifest.txt,metrics.csv,timing.csv,checkpoint/",
    ]
    (run_dir / "manifest.txt").write_text("\n".join(lines) + "\n" + cfg_text)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


class CsvSink:
    """Appends comma-joined rows under a fixed single header row."""

    def __init__(self, path: str | Path, columns: tuple[str, ...]):
        self.path = Path(path)
        self.columns = columns
        self.path.write_text(",".join(columns) + "\n", encoding="utf-8")

    def write_row(self, values):
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(",".join(_fmt(v) for v in values) + "\n")


class MetricsCsvSink(CsvSink):
    """metrics.csv plus the wall-clock split into timing.csv."""

    def __init__(self, run_dir: str | Path):
        run_dir = Path(run_dir)
        super().__init__(run_dir / "metrics.csv", METRICS_COLUMNS)
        self.timing = CsvSink(run_dir / "timing.csv", ("epoch", "wall_seconds"))

    def __call__(self, row: EpochMetrics):
        self.write_row([getattr(row, c) for c in self.columns])
        self.timing.write_row([row.epoch, row.wall_seconds])


def save_checkpoint(
    directory: str | Path,
    policy: GaussianPolicyHead,
    critic: DoubleQ,
    env_name: str,
    buffer=None,
):
    """Container layout: per-network blobs plus a flat-text manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_policy(directory / "policy.bin", policy)
    save_mlp(directory / "q1.bin", critic.q1)
    save_mlp(directory / "q2.bin", critic.q2)
    save_mlp(directory / "target_q1.bin", critic.target_q1)
    save_mlp(directory / "target_q2.bin", critic.target_q2)
    meta = [
        f"env={env_name}",
        f"tau={critic.tau}",
        f"action_dim={policy.action_dim}",
        f"log_std_low={policy.log_std_bounds[0]}",
        f"log_std_high={policy.log_std_bounds[1]}",
        f"critic_layers={','.join(str(s) for s in critic.q1.layer_sizes)}",
        f"code_version={__version__}",
    ]
    (directory / "checkpoint.txt").write_text("\n".join(meta) + "\n")
    if buffer is not None:
        buffer.save(directory / "buffer.npz")


def load_checkpoint(directory: str | Path) -> tuple[GaussianPolicyHead, DoubleQ, dict[str, str]]:
    directory = Path(directory)
    meta: dict[str, str] = {}
    for line in (directory / "checkpoint.txt").read_text().splitlines():
        if line.strip():
            k, v = line.split("=", 1)
            meta[k] = v
    policy = load_policy(directory / "policy.bin")
    critic = DoubleQ(
        load_mlp(directory / "q1.bin"),
        load_mlp(directory / "q2.bin"),
        tau=float(meta.get("tau", 0.005)),
    )
    critic.target_q1 = load_mlp(directory / "target_q1.bin")
    critic.target_q2 = load_mlp(directory / "target_q2.bin")
    return policy, critic, meta


Q_SURFACE_KINDS = ("q1", "q2", "qmax", "qmin")


def compute_q_surface(
    critic: DoubleQ,
    probe_state: np.ndarray,
    resolution: int,
    which: str = "qmin",
    chunk: int = 65536,
) -> np.ndarray:
    """Q values over the [-1, 1]^2 action square at one probe state.

    grid[i, j] holds the value at action (axis0[i], axis1[j]) where both
    axes are linspace(-1, 1, resolution); i is the row-major major index.
    """
    if which not in Q_SURFACE_KINDS:
        raise ValueError(f"which must be one of {Q_SURFACE_KINDS}")
    probe_state = np.asarray(probe_state, dtype=np.float64)
    axis = np.linspace(-1.0, 1.0, resolution)
    a0, a1 = np.meshgrid(axis, axis, indexing="ij")
    actions = np.stack([a0.ravel(), a1.ravel()], axis=1)
    states = np.broadcast_to(probe_state, (actions.shape[0], probe_state.size))
    out = np.empty(actions.shape[0])
    for lo in range(0, actions.shape[0], chunk):
        hi = min(lo + chunk, actions.shape[0])
        s, a = states[lo:hi], actions[lo:hi]
        if which == "q1":
            vals = critic.q1.forward_batch(np.concatenate([s, a], axis=1))[:, 0]
        elif which == "q2":
            vals = critic.q2.forward_batch(np.concatenate([s, a], axis=1))[:, 0]
        elif which == "qmax":
            vals = critic.q_max_batch(s, a)
        else:
            vals = critic.q_min_batch(s, a)
        out[lo:hi] = vals
    return out.reshape(resolution, resolution)


def find_local_maxima(grid: np.ndarray) -> list[tuple[int, int]]:
    """Interior points strictly greater than all 4 axis neighbors."""
    g = np.asarray(grid)
    c = g[1:-1, 1:-1]
    peaks = (
        (c > g[:-2, 1:-1]) & (c > g[2:, 1:-1]) & (c > g[1:-1, :-2]) & (c > g[1:-1, 2:])
    )
    rows, cols = np.nonzero(peaks)
    return [(int(r) + 1, int(col) + 1) for r, col in zip(rows, cols)]


def write_qsurface_csv(
    path: str | Path, grid: np.ndarray, which: str, probe_state: np.ndarray
):
    resolution = grid.shape[0]
    axis = np.linspace(-1.0, 1.0, resolution)
    probe = ";".join(repr(float(x)) for x in np.asarray(probe_state).ravel())
    with open(path, "w", encoding="utf-8") as f:
        f.write("resolution,which,probe_state,row,col,action_0,action_1,q\n")
        for i in range(resolution):
            for j in range(resolution):
                f.write(
                    f"{resolution},{which},{probe},{i},{j},"
                    f"{repr(float(axis[i]))},{repr(float(axis[j]))},{repr(float(grid[i, j]))}\n"
                )


def read_qsurface_csv(path: str | Path) -> tuple[np.ndarray, str, np.ndarray]:
    """Returns (grid, which, probe_state) from the documented schema."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if header[:3] != ["resolution", "which", "probe_state"]:
            raise ValueError(f"{path}: not a qsurface CSV")
        grid = None
        which = ""
        probe = np.zeros(0)
        for line in f:
            parts = line.rstrip("\n").split(",")
            res = int(parts[0])
            if grid is None:
                grid = np.empty((res, res))
                which = parts[1]
                probe = np.array([float(x) for x in parts[2].split(";")])
            grid[int(parts[3]), int(parts[4])] = float(parts[7])
    if grid is None:
        raise ValueError(f"{path}: no data rows")
    return grid, which, probe
