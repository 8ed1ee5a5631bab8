import numpy as np
import pytest

from gaclab.agent import EpochMetrics, TrainConfig, init_agent
from gaclab.envs import BanditEnv
from gaclab.exploration import ExplorationConfig
from gaclab.runio import (
    MetricsCsvSink,
    compute_q_surface,
    config_from_mapping,
    config_to_text,
    find_local_maxima,
    git_blob_hash,
    load_checkpoint,
    parse_config_text,
    read_qsurface_csv,
    save_checkpoint,
    write_manifest,
    write_qsurface_csv,
)


def test_git_blob_hash_matches_git():
    # sha1 of the git blob framing; "hello\n" is the classic fixture
    assert git_blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_config_text_round_trip():
    cfg = TrainConfig(
        alpha=0.25,
        hidden=(32, 64),
        exploration=ExplorationConfig(2.0, 3.5, 16),
        seed=9,
        mode="sac_baseline",
    )
    text = config_to_text("pendulum", cfg)
    env_name, back = parse_config_text(text)
    assert env_name == "pendulum"
    assert back == cfg


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        parse_config_text("env=bandit2d\nbogus_key=1\n")
    with pytest.raises(ValueError):
        parse_config_text("seed=1\n")  # missing env
    with pytest.raises(ValueError):
        parse_config_text("env=bandit2d\nnot a kv line\n")


def test_config_from_mapping_applies_overrides():
    env_name, cfg = config_from_mapping(
        {"env": "bandit2d", "alpha": "0.5", "sample_range": "0.5", "hidden": "8,8"}
    )
    assert env_name == "bandit2d"
    assert cfg.alpha == 0.5
    assert cfg.exploration.sample_range == 0.5
    assert cfg.exploration.sample_count == 32  # untouched default
    assert cfg.hidden == (8, 8)


def test_manifest_written_and_reparseable(tmp_path):
    cfg = TrainConfig(seed=4, hidden=(8,), exploration=ExplorationConfig(1.0, 7.0, 4))
    write_manifest(tmp_path, "bandit2d", cfg, run_id="test-run")
    text = (tmp_path / "manifest.txt").read_text()
    assert "run_id=test-run" in text
    assert "config_hash=" in text
    env_name, back = parse_config_text(text)
    assert env_name == "bandit2d" and back == cfg


def test_metrics_sink_schema_and_timing_split(tmp_path):
    sink = MetricsCsvSink(tmp_path)
    sink(
        EpochMetrics(
            epoch=1,
            env_steps=100,
            mean_exploration_return=1.5,
            mean_eval_return=2.5,
            critic_loss=0.25,
            policy_loss=-0.5,
            beta_t=1.0,
            pi_e_entropy=0.75,
            pi_e_kl_to_policy=0.125,
            wall_seconds=12.5,
        )
    )
    metrics = (tmp_path / "metrics.csv").read_text().splitlines()
    assert metrics[0] == (
        "epoch,env_steps,mean_exploration_return,mean_eval_return,"
        "critic_loss,policy_loss,beta_t,pi_e_entropy,pi_e_kl_to_policy"
    )
    assert metrics[1] == "1,100,1.5,2.5,0.25,-0.5,1.0,0.75,0.125"
    timing = (tmp_path / "timing.csv").read_text().splitlines()
    assert timing[0] == "epoch,wall_seconds"
    assert timing[1].startswith("1,")
    # wall-clock never leaks into metrics.csv
    assert "12.5" not in metrics[1]


def test_checkpoint_container_round_trip(tmp_path):
    env = BanditEnv()
    cfg = TrainConfig(hidden=(8, 8), exploration=ExplorationConfig(1.0, 7.0, 4))
    policy, critic, _ = init_agent(env, cfg)
    critic.q1.params += 0.25  # make online and target differ
    save_checkpoint(tmp_path / "ckpt", policy, critic, "bandit2d")
    p2, c2, meta = load_checkpoint(tmp_path / "ckpt")
    assert meta["env"] == "bandit2d"
    assert float(meta["tau"]) == critic.tau
    np.testing.assert_array_equal(p2.trunk.params, policy.trunk.params)
    np.testing.assert_array_equal(c2.q1.params, critic.q1.params)
    np.testing.assert_array_equal(c2.target_q1.params, critic.target_q1.params)
    assert not np.array_equal(c2.q1.params, c2.target_q1.params)


def test_qsurface_zero_critic_is_flat(tmp_path):
    env = BanditEnv()
    cfg = TrainConfig(hidden=(8,), exploration=ExplorationConfig(1.0, 7.0, 4))
    _, critic, _ = init_agent(env, cfg)
    critic.q1.params[...] = 0.0
    critic.q2.params[...] = 0.0
    grid = compute_q_surface(critic, np.zeros(2), resolution=21, which="qmin")
    assert grid.shape == (21, 21)
    assert np.all(grid == 0.0)
    assert find_local_maxima(grid) == []


def test_qsurface_order_respected():
    env = BanditEnv()
    cfg = TrainConfig(hidden=(8, 8), exploration=ExplorationConfig(1.0, 7.0, 4))
    _, critic, _ = init_agent(env, cfg)
    res = 31
    qmin = compute_q_surface(critic, np.zeros(2), res, "qmin")
    qmax = compute_q_surface(critic, np.zeros(2), res, "qmax")
    assert np.all(qmax >= qmin)
    q1 = compute_q_surface(critic, np.zeros(2), res, "q1")
    axis = np.linspace(-1, 1, res)
    direct = critic.q1.forward(np.array([0.0, 0.0, axis[3], axis[17]]))[0]
    assert q1[3, 17] == pytest.approx(direct, abs=1e-12)


def test_qsurface_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    grid = rng.standard_normal((9, 9))
    path = tmp_path / "qs.csv"
    write_qsurface_csv(path, grid, "qmin", np.array([0.5, -0.5]))
    back, which, probe = read_qsurface_csv(path)
    np.testing.assert_array_equal(back, grid)
    assert which == "qmin"
    np.testing.assert_array_equal(probe, [0.5, -0.5])
    header = path.read_text().splitlines()[0]
    assert header == "resolution,which,probe_state,row,col,action_0,action_1,q"


def test_find_local_maxima_counts_strict_interior_peaks():
    g = np.zeros((7, 7))
    g[2, 2] = 1.0
    g[5, 4] = 2.0
    assert sorted(find_local_maxima(g)) == [(2, 2), (5, 4)]
    flat = np.ones((5, 5))
    assert find_local_maxima(flat) == []
    edge = np.zeros((5, 5))
    edge[0, 2] = 5.0  # edge points never count
    assert find_local_maxima(edge) == []
