import numpy as np
import pytest

from gaclab.cli import main
from gaclab.runio import read_qsurface_csv


FAST_FLAGS = [
    "--hidden", "8,8",
    "--batch-size", "8",
    "--buffer", "2000",
    "--epochs", "2",
    "--steps-per-epoch", "100",
    "--eval-episodes", "1",
    "--warmup", "20",
    "--sample-count", "4",
]


def run_train(tmp_path, extra=()):
    code = main(
        ["train", "--env", "bandit2d", "--seed", "0", "--out", str(tmp_path), *FAST_FLAGS, *extra]
    )
    assert code == 0
    (run_dir,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    return run_dir


def test_train_creates_run_artifacts(tmp_path):
    run_dir = run_train(tmp_path)
    assert (run_dir / "manifest.txt").exists()
    metrics = (run_dir / "metrics.csv").read_text().splitlines()
    assert len(metrics) == 3  # header + 2 epochs
    assert (run_dir / "timing.csv").exists()
    assert (run_dir / "checkpoint" / "policy.bin").exists()
    assert (run_dir / "checkpoint" / "q1.bin").exists()
    assert (run_dir / "checkpoint" / "checkpoint.txt").exists()


def test_train_missing_env_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_train_unknown_env_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--env", "humanoid", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_config_file_with_flag_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("env=bandit2d\nseed=5\nsample_range=7.0\n")
    run_dir = run_train(tmp_path / "out", extra=["--config", str(cfg), "--seed", "6"])
    manifest = (run_dir / "manifest.txt").read_text()
    assert "sample_range=7.0" in manifest
    assert "seed=6" in manifest  # flags win over the file


def test_manifest_rerun_reproduces_metrics_bytes(tmp_path):
    run_dir = run_train(tmp_path / "a")
    manifest = run_dir / "manifest.txt"
    code = main(
        ["train", "--config", str(manifest), "--out", str(tmp_path / "b"), "--run-id", "rerun"]
    )
    assert code == 0
    first = (run_dir / "metrics.csv").read_bytes()
    second = (tmp_path / "b" / "rerun" / "metrics.csv").read_bytes()
    assert first == second


def test_gaclab_out_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("GACLAB_OUT", str(tmp_path / "from_env"))
    code = main(["train", "--env", "bandit2d", "--seed", "0", *FAST_FLAGS])
    assert code == 0
    assert (tmp_path / "from_env").exists()


def test_sweep_writes_aggregate(tmp_path):
    code = main(
        [
            "sweep", "--env", "bandit2d", "--axis", "sample_range",
            "--values", "0.5,7", "--seeds", "0,1", "--workers", "1",
            "--out", str(tmp_path), *FAST_FLAGS,
        ]
    )
    assert code == 0
    (root,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    lines = (root / "sweep.csv").read_text().splitlines()
    assert lines[0] == (
        "axis,value,n_runs,mean_final_eval_return,std_final_eval_return,"
        "mean_wall_seconds,failed_runs"
    )
    assert len(lines) == 3
    assert all(line.endswith(",0") for line in lines[1:])  # no failures
    child_dirs = [p for p in root.iterdir() if p.is_dir()]
    assert len(child_dirs) == 4


def test_sweep_empty_values_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "sweep", "--env", "bandit2d", "--axis", "beta",
                "--values", "", "--seeds", "0", "--out", str(tmp_path),
            ]
        )
    assert exc.value.code == 2


def test_tabular_battery_summary(tmp_path, capsys):
    code = main(
        [
            "tabular", "--mdps", "3", "--iters", "3000", "--seed", "0",
            "--out", str(tmp_path), "--trace-points", "10",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "max final sup-norm distance" in out
    (root,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    summary = (root / "summary.csv").read_text().splitlines()
    assert summary[0] == "mdp,n_states,n_actions,final_sup_norm_to_qstar,iterations"
    assert len(summary) == 4
    trace = (root / "trace_000.csv").read_text().splitlines()
    assert trace[0] == "iteration,beta_t,sup_norm_to_qstar,max_q1,max_q2"
    final = float(summary[1].split(",")[3])
    assert final <= 1e-3


def test_bound_table_output(tmp_path):
    out = tmp_path / "bounds.csv"
    code = main(
        ["bound-table", "--n", "10,100", "--beta", "0.01,100", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,beta,lse,sm,entropy_term,maximum"
    assert len(lines) == 5
    for line in lines[1:]:
        n, beta, lse, sm, ent, mx = line.split(",")
        assert abs(float(lse) - float(sm) - float(ent)) <= 1e-9 * max(1.0, abs(float(lse)))
        assert float(ent) <= np.log(int(n)) / float(beta) + 1e-12
        if float(beta) == 100.0:
            assert abs(float(sm) - float(mx)) <= 0.01


def test_qsurface_export_and_order(tmp_path):
    run_dir = run_train(tmp_path / "run")
    out = tmp_path / "qs.csv"
    code = main(
        [
            "qsurface", "--checkpoint", str(run_dir / "checkpoint"), "--env", "bandit2d",
            "--resolution", "41", "--which", "qmin", "--out", str(out),
        ]
    )
    assert code == 0
    grid, which, probe = read_qsurface_csv(out)
    assert which == "qmin" and grid.shape == (41, 41)
    np.testing.assert_array_equal(probe, np.zeros(2))
    out_max = tmp_path / "qsmax.csv"
    main(
        [
            "qsurface", "--checkpoint", str(run_dir / "checkpoint"), "--env", "bandit2d",
            "--resolution", "41", "--which", "qmax", "--out", str(out_max),
        ]
    )
    gmax, _, _ = read_qsurface_csv(out_max)
    assert np.all(gmax >= grid)


def test_qsurface_rejects_non_2d_env(tmp_path):
    run_dir = run_train(tmp_path / "run")
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "qsurface", "--checkpoint", str(run_dir / "checkpoint"),
                "--env", "pendulum", "--resolution", "11",
            ]
        )
    assert exc.value.code == 2


def test_evaluate_from_checkpoint(tmp_path, capsys):
    run_dir = run_train(tmp_path / "run")
    out = tmp_path / "eval.csv"
    code = main(
        [
            "evaluate", "--checkpoint", str(run_dir / "checkpoint"), "--env", "bandit2d",
            "--episodes", "3", "--seed", "1", "--out", str(out),
        ]
    )
    assert code == 0
    assert "mean return over 3 episodes" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "episode,return"
    assert len(lines) == 4
