import csv
import json

import numpy as np
import pytest

from lpseq.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv(out):
    pairs = {}
    for line in out.strip().splitlines():
        key, _, value = line.partition(":")
        pairs[key.strip()] = value.strip()
    return pairs


def test_project_p2(capsys):
    code, out, err = run_cli(capsys, "project", "--p", "2", "--radius", "1",
                             "--input", "3,4")
    assert code == 0
    kv = parse_kv(out)
    point = np.array([float(v) for v in kv["point"].split(",")])
    np.testing.assert_allclose(point, [0.6, 0.8], atol=1e-9)
    assert "config" in err  # resolved config echoed on stderr


def test_project_p0_sparsity(capsys):
    code, out, _ = run_cli(capsys, "project", "--p", "0", "--sparsity", "2",
                           "--input", "3,-1,2")
    assert code == 0
    point = np.array([float(v) for v in parse_kv(out)["point"].split(",")])
    np.testing.assert_array_equal(point, [3.0, 0.0, 2.0])


def test_project_p_inf(capsys):
    code, out, _ = run_cli(capsys, "project", "--p", "inf", "--radius", "1",
                           "--input", "2,-0.5")
    assert code == 0
    point = np.array([float(v) for v in parse_kv(out)["point"].split(",")])
    np.testing.assert_array_equal(point, [1.0, -0.5])


def test_project_reads_file(tmp_path, capsys):
    path = tmp_path / "vec.txt"
    path.write_text("3\n4\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "project", "--p", "2", "--input", str(path))
    assert code == 0
    point = [float(v) for v in parse_kv(out)["point"].split(",")]
    assert point == pytest.approx([0.6, 0.8], abs=1e-9)


def test_project_parse_error_exit_2(capsys):
    code, _, _ = run_cli(capsys, "project", "--p", "2", "--input", "3,abc")
    assert code == 2
    code, _, _ = run_cli(capsys, "project", "--p", "0", "--input", "1,2")
    assert code == 2  # p = 0 without --sparsity


def test_project_gap_reported_for_quasinorm(capsys):
    code, out, _ = run_cli(capsys, "project", "--p", "0.5", "--input", "2,1")
    assert code == 0
    assert "duality_gap" in parse_kv(out)


def test_unknown_flag_is_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["project", "--p", "2", "--input", "1,2", "--bogus"])
    assert exc.value.code == 2


def test_rates_examples(capsys):
    code, out, _ = run_cli(capsys, "rates", "--p", "3", "--d", "100",
                           "--sigma", "0.1")
    assert code == 0
    kv = parse_kv(out)
    assert float(kv["control_value"]) == pytest.approx(1.0)
    assert kv["label"] == "optimal_thm2.1(i)"

    code, out, _ = run_cli(capsys, "rates", "--p", "0.5", "--d", "10000",
                           "--sigma", "0.05")
    assert parse_kv(out)["label"] == "optimal_thm2.1(ii)"

    code, out, _ = run_cli(capsys, "rates", "--p", "1.5", "--d", "10000",
                           "--sigma", "0.02")
    assert parse_kv(out)["label"] == "suboptimal_thm2.2"


def test_rates_invalid_exit_2(capsys):
    code, _, _ = run_cli(capsys, "rates", "--p", "1.5", "--d", "0", "--sigma", "0.1")
    assert code == 2


def test_verify_suite_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "verify", "--suite", "monotone", "--seed", "7")
    code2, out2, _ = run_cli(capsys, "verify", "--suite", "monotone", "--seed", "7")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "PASS" in out1


def test_reproduce_smoke(tmp_path, capsys):
    out_dir = tmp_path / "fig"
    code, out, err = run_cli(capsys, "--threads", "1", "reproduce",
                             "--figure", "2a", "--max-d", "100", "--reps", "1",
                             "--seed", "3", "--out", str(out_dir))
    assert code == 0
    rows = list(csv.DictReader((out_dir / "results.csv").open()))
    assert len(rows) == 2  # one d, two estimators
    assert {r["estimator"] for r in rows} == {"mle", "soft_threshold"}
    slopes = json.loads((out_dir / "slopes.json").read_text())
    assert "minimax_anchor" in slopes
    spec = json.loads((out_dir / "plot_spec.json").read_text())
    assert spec["data"] == "results.csv"
    assert not (out_dir / "cursor.json").exists()
    assert json.loads(out.strip())["slopes"] is not None


def test_reproduce_resumes_from_cursor(tmp_path, capsys):
    out_dir = tmp_path / "fig"
    run_cli(capsys, "--threads", "1", "reproduce", "--figure", "2b",
            "--max-d", "160", "--reps", "2", "--seed", "5", "--out", str(out_dir))
    first = (out_dir / "results.csv").read_text()
    # rerun with identical flags: same output
    run_cli(capsys, "--threads", "1", "reproduce", "--figure", "2b",
            "--max-d", "160", "--reps", "2", "--seed", "5", "--out", str(out_dir))
    assert (out_dir / "results.csv").read_text() == first


def test_project_solver_diagnostic_exit_3(capsys):
    # an unattainable tolerance flips the diagnostic gate
    code, out, err = run_cli(capsys, "project", "--p", "2", "--radius", "1",
                             "--input", "3,4", "--tol", "1e-30")
    assert code == 3
    assert "point" in parse_kv(out)  # the result is still printed
    assert "diagnostic" in err


def test_reproduce_partial_exit_4_then_resume(tmp_path, capsys, monkeypatch):
    import lpseq.simulate as sim

    out_dir = tmp_path / "fig"
    real = sim.estimate_risk
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("synthetic cell failure")
        return real(*args, **kwargs)

    monkeypatch.setattr(sim, "estimate_risk", flaky)
    code, _, err = run_cli(capsys, "--threads", "1", "reproduce", "--figure", "2a",
                           "--max-d", "160", "--reps", "1", "--seed", "1",
                           "--out", str(out_dir))
    assert code == 4
    assert (out_dir / "cursor.json").exists()
    monkeypatch.setattr(sim, "estimate_risk", real)
    code, _, _ = run_cli(capsys, "--threads", "1", "reproduce", "--figure", "2a",
                         "--max-d", "160", "--reps", "1", "--seed", "1",
                         "--out", str(out_dir))
    assert code == 0
    rows = list(csv.DictReader((out_dir / "results.csv").open()))
    assert len(rows) == 4  # two dims x two estimators, completed after resume
    assert not (out_dir / "cursor.json").exists()


def test_threads_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LPSEQ_THREADS", "2")
    out_dir = tmp_path / "fig"
    code, _, _ = run_cli(capsys, "--threads", "1", "reproduce", "--figure", "2a",
                         "--max-d", "100", "--reps", "1", "--seed", "2",
                         "--out", str(out_dir))
    assert code == 0


def test_simulate_from_config(tmp_path, capsys):
    cfg = {
        "regime": "custom",
        "p": 1.5,
        "d_grid": [10, 20],
        "sigma_rule": [0.5, 0.4],
        "reps": 2,
        "estimators": ["zero"],
        "seed": 9,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    code, out, _ = run_cli(capsys, "simulate", "--config", str(path))
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 2

    cfg["mystery"] = 1
    path.write_text(json.dumps(cfg), encoding="utf-8")
    code, _, err = run_cli(capsys, "simulate", "--config", str(path))
    assert code == 2
    assert "mystery" in err
