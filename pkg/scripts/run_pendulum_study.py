"""Pendulum swing-up learning study over several seeds: full-length runs,
reporting per-seed threefold-improvement outcomes over the untrained
policy and the exploration vs evaluation return aggregate.

Usage: python scripts/run_pendulum_study.py [--seeds 10] [--epochs 100]
"""

import argparse
import concurrent.futures
from pathlib import Path

import numpy as np

from gaclab.agent import TrainConfig, evaluate, init_agent, train
from gaclab.envs import make_env
from gaclab.exploration import ExplorationConfig
from gaclab.runio import MetricsCsvSink, save_checkpoint, write_manifest


def study_config(seed: int, epochs: int) -> TrainConfig:
    return TrainConfig(
        batch_size=64,
        buffer_capacity=epochs * 1000 + 10_000,
        hidden=(64, 64),
        alpha=0.2,
        exploration=ExplorationConfig(1.0, 7.0, 32),
        steps_per_epoch=1000,
        total_epochs=epochs,
        eval_episodes=5,
        seed=seed,
        warmup_steps=1000,
    )


def run_one(args):
    seed, epochs, root = args
    cfg = study_config(seed, epochs)
    env = make_env("pendulum")
    policy, _, _ = init_agent(env, cfg)
    untrained = evaluate(make_env("pendulum"), policy, cfg.eval_episodes, seed=777).mean_return
    bar = untrained / 3.0
    run_dir = Path(root) / f"seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(run_dir, "pendulum", cfg, run_dir.name)
    sink = MetricsCsvSink(run_dir)
    result = train(env, cfg, sinks=[sink])
    save_checkpoint(run_dir / "checkpoint", result.policy, result.critic, "pendulum")
    evals = [m.mean_eval_return for m in result.metrics]
    expls = [m.mean_exploration_return for m in result.metrics]
    return seed, untrained, max(evals), bar, float(np.mean(evals)), float(np.mean(expls))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--out", default="runs/pendulum-study")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    improved = 0
    eval_means, expl_means = [], []
    jobs = [(seed, args.epochs, args.out) for seed in range(args.seeds)]
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
        for seed, untrained, best, bar, ev, ex in pool.map(run_one, jobs):
            ok = best >= bar
            improved += ok
            eval_means.append(ev)
            expl_means.append(ex)
            print(f"seed={seed}: untrained {untrained:.0f}, best eval {best:.0f}, "
                  f"3x bar {bar:.0f} -> {'improved' if ok else 'missed'}", flush=True)
    print(f"\n{improved}/{args.seeds} seeds improved threefold")
    print(f"aggregate eval {np.mean(eval_means):.0f} vs exploration {np.mean(expl_means):.0f}")
    print(f"runs in {args.out}")


if __name__ == "__main__":
    main()
