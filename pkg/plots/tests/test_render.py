from pathlib import Path

import numpy as np
import pytest

from gacplots.render import PlotJob, SchemaError, main, render

METRICS_HEADER = (
    "epoch,env_steps,mean_exploration_return,mean_eval_return,"
    "critic_loss,policy_loss,beta_t,pi_e_entropy,pi_e_kl_to_policy"
)


def write_metrics_csv(path, seed, epochs=20):
    rng = np.random.default_rng(seed)
    lines = [METRICS_HEADER]
    for e in range(1, epochs + 1):
        ev = -1000.0 / e + 10.0 * rng.standard_normal()
        ex = ev - 50.0 - 10.0 * rng.random()
        lines.append(
            f"{e},{e * 1000},{ex},{ev},{0.5 / e},{-0.1 * e},{float(e)},{3.0},{0.2}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_qsurface_csv(path, res=41):
    axis = np.linspace(-1, 1, res)
    lines = ["resolution,which,probe_state,row,col,action_0,action_1,q"]
    for i in range(res):
        for j in range(res):
            a = np.array([axis[i], axis[j]])
            q = np.exp(-np.sum((a - 0.6) ** 2) / 0.045) + 0.6 * np.exp(
                -np.sum((a + 0.5) ** 2) / 0.045
            )
            lines.append(
                f"{res},qmin,0.0;0.0,{i},{j},{float(axis[i])!r},{float(axis[j])!r},{float(q)!r}"
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_sweep_csv(path):
    lines = [
        "axis,value,n_runs,mean_final_eval_return,std_final_eval_return,"
        "mean_wall_seconds,failed_runs",
        "sample_range,0.5,10,0.61,0.05,30.0,0",
        "sample_range,7.0,10,0.98,0.02,35.0,0",
        "sample_range,9.0,10,0.95,0.04,36.0,0",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_trace_csv(path):
    lines = ["iteration,beta_t,sup_norm_to_qstar,max_q1,max_q2"]
    for t in range(1, 200, 10):
        lines.append(f"{t},{float(t)},{float(10.0 * 0.9 ** t)!r},{5.0},{5.0}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_single_run_curve_renders(tmp_path):
    csv = write_metrics_csv(tmp_path / "m.csv", seed=0)
    out = render(PlotJob(inputs=(csv,), kind="curves", output=tmp_path / "c.png"))
    assert out.exists() and out.stat().st_size > 1000


def test_multi_seed_curve_band_and_determinism(tmp_path):
    csvs = tuple(write_metrics_csv(tmp_path / f"m{i}.csv", seed=i) for i in range(6))
    job = PlotJob(inputs=csvs, kind="curves", output=tmp_path / "band.png")
    render(job)
    first = job.output.read_bytes()
    render(job)
    assert job.output.read_bytes() == first


def test_smoothing_window(tmp_path):
    csvs = (write_metrics_csv(tmp_path / "m.csv", seed=3),)
    out = render(
        PlotJob(inputs=csvs, kind="curves", output=tmp_path / "s.png", smooth=5)
    )
    assert out.exists()


def test_inputs_never_modified(tmp_path):
    csv = write_metrics_csv(tmp_path / "m.csv", seed=1)
    before = csv.read_bytes()
    render(PlotJob(inputs=(csv,), kind="curves", output=tmp_path / "c.png"))
    assert csv.read_bytes() == before


def test_surface_heatmap_and_3d(tmp_path):
    csv = write_qsurface_csv(tmp_path / "qs.csv")
    out = render(PlotJob(inputs=(csv,), kind="surface", output=tmp_path / "surf.png"))
    assert out.exists() and out.stat().st_size > 5000
    # repeated invocation is byte-identical
    first = out.read_bytes()
    render(PlotJob(inputs=(csv,), kind="surface", output=tmp_path / "surf.png"))
    assert out.read_bytes() == first


def test_sweep_plot(tmp_path):
    csv = write_sweep_csv(tmp_path / "sweep.csv")
    out = render(PlotJob(inputs=(csv,), kind="sweep", output=tmp_path / "sweep.png"))
    assert out.exists()


def test_convergence_plot(tmp_path):
    csvs = tuple(write_trace_csv(tmp_path / f"t{i}.csv") for i in range(3))
    out = render(
        PlotJob(inputs=csvs, kind="convergence", output=tmp_path / "conv.png")
    )
    assert out.exists()


def test_schema_mismatch_raises_with_diagnostics(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n", encoding="utf-8")
    with pytest.raises(SchemaError) as exc:
        render(PlotJob(inputs=(bad,), kind="curves", output=tmp_path / "x.png"))
    assert "missing columns" in str(exc.value)


def test_cli_exit_codes(tmp_path, capsys):
    good = write_metrics_csv(tmp_path / "m.csv", seed=0)
    assert (
        main(["--kind", "curves", "--in", str(good), "--out", str(tmp_path / "ok.png")])
        == 0
    )
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n", encoding="utf-8")
    code = main(["--kind", "curves", "--in", str(bad), "--out", str(tmp_path / "no.png")])
    assert code == 1
    assert "missing columns" in capsys.readouterr().err


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError):
        PlotJob(inputs=(tmp_path / "x.csv",), kind="pie", output=tmp_path / "x.png")


# ---------------------------------------------------------------------------
# acceptance: render the training harness's real study outputs when the
# sibling package's acceptance suite has produced them (synthetic fixtures
# above cover the same schemas otherwise)

HARNESS_ARTIFACTS = Path(__file__).resolve().parents[2] / "artifacts"


def _render_twice(job):
    render(job)
    first = job.output.read_bytes()
    render(job)
    return first, job.output.read_bytes()


def test_s1_learning_curves_from_study_csvs(tmp_path):
    real = sorted(HARNESS_ARTIFACTS.glob("p8_metrics_seed*.csv"))
    inputs = tuple(real) if real else tuple(
        write_metrics_csv(tmp_path / f"m{i}.csv", seed=i) for i in range(6)
    )
    job = PlotJob(inputs=inputs, kind="curves", output=tmp_path / "s1_curves.png")
    first, second = _render_twice(job)
    ok = job.output.exists() and first == second
    src = "study CSVs" if real else "schema-equivalent fixtures"
    print(f"\nS1(curves) {'PASS' if ok else 'FAIL'} — {len(inputs)} {src}, "
          f"byte-identical re-render {first == second}")
    assert ok


def test_s1_surface_from_study_grid(tmp_path):
    real = HARNESS_ARTIFACTS / "p9_qsurface.csv"
    source = real if real.exists() else write_qsurface_csv(tmp_path / "qs.csv")
    job = PlotJob(inputs=(source,), kind="surface", output=tmp_path / "s1_surface.png")
    first, second = _render_twice(job)
    ok = job.output.exists() and first == second
    src = "study grid" if real.exists() else "schema-equivalent fixture"
    print(f"\nS1(surface) {'PASS' if ok else 'FAIL'} — {src}, "
          f"byte-identical re-render {first == second}")
    assert ok
