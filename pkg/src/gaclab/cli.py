"""Command-line harness: single runs, hyperparameter sweeps, tabular
convergence batteries, identity bound tables, Q-surface exports, and
checkpoint evaluation.

Output root resolution: --out flag, else the GACLAB_OUT environment
variable, else ./runs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .agent import TrainConfig, TrainingError, evaluate, train
from .envs import ENV_NAMES, make_env
from .exploration import ExplorationConfig
from .math_ops import bound_table
from .runio import (
    CsvSink,
    MetricsCsvSink,
    Q_SURFACE_KINDS,
    compute_q_surface,
    config_from_mapping,
    config_to_text,
    find_local_maxima,
    load_checkpoint,
    parse_config_text,
    save_checkpoint,
    write_manifest,
    write_qsurface_csv,
)
from .tabular import BetaSchedule, QTablePair, gdq_value_iteration, random_mdp


def _out_root(flag_value: str | None) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get("GACLAB_OUT")
    return Path(env) if env else Path("runs")


def _parse_float_list(text: str) -> list[float]:
    vals = [float(s) for s in text.split(",") if s.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("expected a nonempty comma-separated list")
    return vals


def _parse_int_list(text: str) -> list[int]:
    vals = [int(s) for s in text.split(",") if s.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("expected a nonempty comma-separated list")
    return vals


_OVERRIDE_FLAGS = {
    "seed": "seed",
    "gamma": "gamma",
    "tau": "tau",
    "lr": "lr",
    "alpha": "alpha",
    "batch_size": "batch_size",
    "buffer": "buffer_capacity",
    "hidden": "hidden",
    "epochs": "total_epochs",
    "steps_per_epoch": "steps_per_epoch",
    "eval_episodes": "eval_episodes",
    "mode": "mode",
    "warmup": "warmup_steps",
    "beta": "beta",
    "sample_range": "sample_range",
    "sample_count": "sample_count",
}


def _add_config_flags(p: argparse.ArgumentParser, require_env: bool):
    p.add_argument("--env", choices=ENV_NAMES, required=require_env)
    p.add_argument("--config", help="flat key=value config file; flags win over it")
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--buffer", type=int)
    p.add_argument("--hidden", help="comma-separated hidden widths, e.g. 256,256")
    p.add_argument("--epochs", type=int)
    p.add_argument("--steps-per-epoch", type=int, dest="steps_per_epoch")
    p.add_argument("--eval-episodes", type=int, dest="eval_episodes")
    p.add_argument("--mode", choices=("gac", "sac_baseline"))
    p.add_argument("--warmup", type=int)
    p.add_argument("--beta", type=float, help="exploration inverse-temperature base")
    p.add_argument("--sample-range", type=float, dest="sample_range")
    p.add_argument("--sample-count", type=int, dest="sample_count")


def _effective_config(args) -> tuple[str, TrainConfig]:
    kv: dict[str, str] = {}
    if args.config:
        env_name, cfg = parse_config_text(Path(args.config).read_text())
        kv = dict(
            line.split("=", 1)
            for line in config_to_text(env_name, cfg).splitlines()
            if line
        )
    if args.env:
        kv["env"] = args.env
    for flag, key in _OVERRIDE_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            kv[key] = str(v)
    if "env" not in kv:
        raise SystemExit2("an environment is required (--env or env= in the config)")
    return config_from_mapping(kv)


class SystemExit2(SystemExit):
    def __init__(self, message: str):
        print(f"error: {message}", file=sys.stderr)
        super().__init__(2)


def _run_one_training(env_name: str, config: TrainConfig, run_dir: Path, run_id: str,
                      save_buffer: bool = False) -> float:
    """Execute one run into run_dir; returns the final mean eval return."""
    run_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(run_dir, env_name, config, run_id)
    sink = MetricsCsvSink(run_dir)
    env = make_env(env_name)
    try:
        result = train(env, config, sinks=[sink])
    except TrainingError as err:
        save_checkpoint(run_dir / "diagnostic_checkpoint", err.result.policy,
                        err.result.critic, env_name)
        raise
    save_checkpoint(
        run_dir / "checkpoint",
        result.policy,
        result.critic,
        env_name,
        buffer=result.buffer if save_buffer else None,
    )
    if result.metrics:
        return result.metrics[-1].mean_eval_return
    return float("nan")


def cmd_train(args) -> int:
    env_name, config = _effective_config(args)
    run_id = args.run_id or f"{env_name}-{config.mode}-seed{config.seed}"
    run_dir = _out_root(args.out) / run_id
    try:
        final = _run_one_training(env_name, config, run_dir, run_id,
                                  save_buffer=args.save_buffer)
    except TrainingError as err:
        print(f"training aborted: {err}", file=sys.stderr)
        print(f"diagnostic checkpoint written under {run_dir}", file=sys.stderr)
        return 1
    print(f"run {run_id}: final mean eval return {final}")
    print(f"outputs in {run_dir}")
    return 0


def _sweep_child(payload) -> dict:
    env_name, cfg_text, run_dir, run_id = payload
    _, config = parse_config_text(cfg_text)
    t0 = time.perf_counter()
    out = {"run_id": run_id, "error": "", "final_eval": float("nan"), "wall": 0.0}
    try:
        out["final_eval"] = _run_one_training(env_name, config, Path(run_dir), run_id)
    except Exception as err:  # partial failures recorded, sweep continues
        out["error"] = str(err)
    out["wall"] = time.perf_counter() - t0
    return out


SWEEP_AXES = {
    "beta": "beta_base",
    "sample_range": "sample_range",
    "sample_count": "sample_count",
}


def cmd_sweep(args) -> int:
    env_name, base_config = _effective_config(args)
    axis_field = SWEEP_AXES[args.axis]
    values = args.values
    seeds = args.seeds
    root = _out_root(args.out) / (args.run_id or f"sweep-{args.axis}-{env_name}")
    root.mkdir(parents=True, exist_ok=True)

    jobs = []
    for value in values:
        expl_kwargs = {
            "beta_base": base_config.exploration.beta_base,
            "sample_range": base_config.exploration.sample_range,
            "sample_count": base_config.exploration.sample_count,
        }
        expl_kwargs[axis_field] = int(value) if axis_field == "sample_count" else value
        for seed in seeds:
            cfg = replace(
                base_config, seed=seed, exploration=ExplorationConfig(**expl_kwargs)
            )
            run_id = f"{args.axis}{value:g}-seed{seed}"
            jobs.append(
                (value, seed, (env_name, config_to_text(env_name, cfg), str(root / run_id), run_id))
            )

    results: dict[tuple[float, int], dict] = {}
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {
                pool.submit(_sweep_child, payload): (value, seed)
                for value, seed, payload in jobs
            }
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    else:
        for value, seed, payload in jobs:
            results[(value, seed)] = _sweep_child(payload)

    sink = CsvSink(
        root / "sweep.csv",
        (
            "axis",
            "value",
            "n_runs",
            "mean_final_eval_return",
            "std_final_eval_return",
            "mean_wall_seconds",
            "failed_runs",
        ),
    )
    for value in values:
        rows = [results[(value, s)] for s in seeds]
        ok = [r for r in rows if not r["error"]]
        finals = [r["final_eval"] for r in ok]
        sink.write_row(
            [
                args.axis,
                value,
                len(rows),
                float(np.mean(finals)) if finals else float("nan"),
                float(np.std(finals)) if finals else float("nan"),
                float(np.mean([r["wall"] for r in rows])),
                len(rows) - len(ok),
            ]
        )
    for r in results.values():
        if r["error"]:
            print(f"run {r['run_id']} failed: {r['error']}", file=sys.stderr)
    print(f"sweep aggregate in {root / 'sweep.csv'}")
    return 0


def cmd_tabular(args) -> int:
    root = _out_root(args.out) / (args.run_id or "tabular")
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    schedule = BetaSchedule(base=args.beta_base, rule=args.beta_rule)
    summary = CsvSink(
        root / "summary.csv",
        ("mdp", "n_states", "n_actions", "final_sup_norm_to_qstar", "iterations"),
    )
    worst = 0.0
    for k in range(args.mdps):
        n_states = int(rng.integers(2, args.max_states + 1))
        n_actions = int(rng.integers(2, args.max_actions + 1))
        mdp = random_mdp(n_states, n_actions, args.gamma, rng)
        init = QTablePair.random_uniform(n_states, n_actions, rng)
        trace = gdq_value_iteration(
            mdp, schedule, args.iters, init, update=args.update, keep_pairs=False
        )
        trace_sink = CsvSink(
            root / f"trace_{k:03d}.csv",
            ("iteration", "beta_t", "sup_norm_to_qstar", "max_q1", "max_q2"),
        )
        q1m, q2m = trace.max_q1(), trace.max_q2()
        stride = max(1, args.iters // args.trace_points)
        kept = list(range(0, args.iters, stride))
        if kept[-1] != args.iters - 1:
            kept.append(args.iters - 1)
        for t in kept:
            trace_sink.write_row(
                [
                    t + 1,
                    trace.beta_values[t],
                    trace.sup_norm_to_qstar[t],
                    q1m[min(t, len(q1m) - 1)],
                    q2m[min(t, len(q2m) - 1)],
                ]
            )
        summary.write_row([k, n_states, n_actions, trace.final_distance, args.iters])
        worst = max(worst, trace.final_distance)
    print(f"battery of {args.mdps} MDPs: max final sup-norm distance {worst:.3e}")
    print(f"traces in {root}")
    return 0


def cmd_bound_table(args) -> int:
    rows = []
    for beta in _parse_float_list(args.beta):
        for n in _parse_int_list(args.n):
            r = bound_table(n, beta, args.seed)
            rows.append((r.n, r.beta, r.lse, r.sm, r.entropy_term, r.max))
    header = "n,beta,lse,sm,entropy_term,maximum"
    lines = [header] + [",".join(repr(x) if isinstance(x, float) else str(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        print(f"bound table in {out}")
    else:
        print(text, end="")
    return 0


def cmd_qsurface(args) -> int:
    env = make_env(args.env)
    if env.spec.action_dim != 2:
        raise SystemExit2(f"{args.env} has action_dim {env.spec.action_dim}; need 2")
    policy, critic, meta = load_checkpoint(args.checkpoint)
    if args.probe_state == "reset":
        probe = env.reset(args.probe_seed)
    else:
        probe = np.array([float(x) for x in args.probe_state.split(",")])
        if probe.shape != (env.spec.state_dim,):
            raise SystemExit2(
                f"probe state needs {env.spec.state_dim} components, got {probe.size}"
            )
    grid = compute_q_surface(critic, probe, args.resolution, args.which)
    out = Path(args.out) if args.out else Path(f"qsurface_{args.which}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_qsurface_csv(out, grid, args.which, probe)
    peaks = find_local_maxima(grid)
    print(f"qsurface {args.which} at resolution {args.resolution}: {len(peaks)} local maxima")
    print(f"grid in {out}")
    return 0


def cmd_evaluate(args) -> int:
    env = make_env(args.env)
    policy, _, _ = load_checkpoint(args.checkpoint)
    res = evaluate(env, policy, args.episodes, args.seed)
    print(f"mean return over {args.episodes} episodes: {res.mean_return}")
    for i, r in enumerate(res.returns):
        print(f"episode {i}: {r}")
    if args.out:
        sink = CsvSink(Path(args.out), ("episode", "return"))
        for i, r in enumerate(res.returns):
            sink.write_row([i, r])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaclab",
        description="greedy actor-critic training and verification harness",
    )
    parser.add_argument("--version", action="version", version=f"gaclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training configuration")
    _add_config_flags(p_train, require_env=False)
    p_train.add_argument("--out", help="output root (default GACLAB_OUT or ./runs)")
    p_train.add_argument("--run-id", dest="run_id")
    p_train.add_argument("--save-buffer", action="store_true", dest="save_buffer")
    p_train.set_defaults(fn=cmd_train)

    p_sweep = sub.add_parser("sweep", help="fan out runs over one exploration axis")
    _add_config_flags(p_sweep, require_env=False)
    p_sweep.add_argument("--axis", choices=tuple(SWEEP_AXES), required=True)
    p_sweep.add_argument("--values", required=True, type=_parse_float_list,
                         help="comma-separated axis values")
    p_sweep.add_argument("--seeds", required=True, type=_parse_int_list,
                         help="comma-separated seeds")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--run-id", dest="run_id")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_tab = sub.add_parser("tabular", help="double-table softmax value-iteration battery")
    p_tab.add_argument("--mdps", type=int, default=20)
    p_tab.add_argument("--max-states", type=int, default=6, dest="max_states")
    p_tab.add_argument("--max-actions", type=int, default=4, dest="max_actions")
    p_tab.add_argument("--gamma", type=float, default=0.9)
    p_tab.add_argument("--iters", type=int, default=10000)
    p_tab.add_argument("--beta-base", type=float, default=1.0, dest="beta_base")
    p_tab.add_argument("--beta-rule", choices=("linear", "constant"), default="linear",
                       dest="beta_rule")
    p_tab.add_argument("--update", choices=("alternate", "simultaneous"), default="alternate")
    p_tab.add_argument("--seed", type=int, default=0)
    p_tab.add_argument("--trace-points", type=int, default=200, dest="trace_points")
    p_tab.add_argument("--out")
    p_tab.add_argument("--run-id", dest="run_id")
    p_tab.set_defaults(fn=cmd_tabular)

    p_bt = sub.add_parser("bound-table", help="log-sum-exp / softmax identity table")
    p_bt.add_argument("--n", default="10,100,1000,10000,100000,1000000")
    p_bt.add_argument("--beta", default="0.01,1,100")
    p_bt.add_argument("--seed", type=int, default=0)
    p_bt.add_argument("--out")
    p_bt.set_defaults(fn=cmd_bound_table)

    p_qs = sub.add_parser("qsurface", help="export a critic surface over the action square")
    p_qs.add_argument("--checkpoint", required=True)
    p_qs.add_argument("--env", choices=ENV_NAMES, required=True)
    p_qs.add_argument("--resolution", type=int, default=400)
    p_qs.add_argument("--which", choices=Q_SURFACE_KINDS, default="qmin")
    p_qs.add_argument("--probe-state", default="reset", dest="probe_state",
                      help='"reset" or comma-separated state components')
    p_qs.add_argument("--probe-seed", type=int, default=0, dest="probe_seed")
    p_qs.add_argument("--out")
    p_qs.set_defaults(fn=cmd_qsurface)

    p_ev = sub.add_parser("evaluate", help="deterministic episodes from a checkpoint")
    p_ev.add_argument("--checkpoint", required=True)
    p_ev.add_argument("--env", choices=ENV_NAMES, required=True)
    p_ev.add_argument("--episodes", type=int, default=10)
    p_ev.add_argument("--seed", type=int, default=0)
    p_ev.add_argument("--out")
    p_ev.set_defaults(fn=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
