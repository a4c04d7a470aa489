import subprocess
import sys

import numpy as np
import pytest

from conformal_guard import GeneratorConfig, generate_exchangeable_pairs
from conformal_guard.cli import main
from conformal_guard.csvio import ingest_csv


def run_cli(*args):
    return main([str(a) for a in args])


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture()
def dataset(tmp_path):
    path = tmp_path / "data.csv"
    assert (
        run_cli(
            "generate", "--mode", "driving", "--n", 400, "--unsafe-fraction", 0.25,
            "--correlation", 0.8, "--f0", 0.0, "--seed", 7, "--output", path,
        )
        == 0
    )
    return path


def test_generate_matches_library_output(dataset, tmp_path):
    cfg = GeneratorConfig(n_samples=400, unsafe_fraction=0.25, correlation=0.8, f0=0.0)
    expected = generate_exchangeable_pairs(cfg, np.random.default_rng(7))
    assert ingest_csv(dataset) == expected


def test_full_pipeline_exit_codes(dataset, tmp_path):
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", dataset, "--eps", 0.05, "--f0", 0.0, "--output", cal) == 0

    scores = write(tmp_path / "scores.csv", "g\n0.1\n0.9\n")
    dec = tmp_path / "dec.csv"
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", dec, "--seed", 1) == 0
    assert dec.read_text().splitlines()[0] == "g,q,u,warn"

    rep = tmp_path / "eval.csv"
    assert (
        run_cli(
            "evaluate", "--input", dataset, "--eps", 0.05, "--f0", 0.0,
            "--trials", 10, "--seed", 2, "--output", rep,
        )
        == 0
    )
    assert rep.read_text().splitlines()[-1].startswith("aggregate,")

    swp = tmp_path / "sweep.csv"
    assert (
        run_cli(
            "sweep", "--input", dataset, "--axis", "epsilon", "--values", "0.05,0.1",
            "--f0", 0.0, "--trials", 5, "--seed", 2, "--output", swp,
        )
        == 0
    )
    assert len(swp.read_text().splitlines()) == 3

    assert run_cli("compare-pac", "--eps", 0.05, "--delta", 0.05) == 0


def test_warn_reproduces_the_rank_example(tmp_path, capsys):
    data = write(
        tmp_path / "d.csv",
        "g,f\n0.1,-1.0\n0.2,-1.0\n0.3,-1.0\n0.4,-1.0\n0.8,5.0\n",
    )
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", data, "--eps", 0.5, "--f0", 0.0, "--output", cal) == 0
    scores = write(tmp_path / "s.csv", "g\n0.25\n")
    out = tmp_path / "dec.csv"
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", out, "--seed", 0) == 0
    assert out.read_text() == "g,q,u,warn\n0.25,0.6,0,1\n"


def test_trivial_calibration_prints_guidance_and_always_warns(tmp_path, capsys):
    rows = "\n".join(f"0.{i},-1.0" for i in range(1, 10))  # 9 unsafe samples
    data = write(tmp_path / "d.csv", f"g,f\n{rows}\n")
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", data, "--eps", 0.05, "--f0", 0.0, "--output", cal) == 0
    printed = capsys.readouterr().out
    assert "TRIVIAL" in printed
    assert "at least 20" in printed.lower()
    assert "trivial true" in cal.read_text()

    scores = write(tmp_path / "s.csv", "g\n0.0\n0.5\n99.0\n")
    out = tmp_path / "dec.csv"
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", out) == 0
    warn_bits = [line.split(",")[-1] for line in out.read_text().splitlines()[1:]]
    assert warn_bits == ["1", "1", "1"]


def test_zero_unsafe_calibration_is_still_success(tmp_path, capsys):
    data = write(tmp_path / "d.csv", "g,f\n0.5,1.0\n0.6,2.0\n")
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", data, "--eps", 0.05, "--f0", 0.0, "--output", cal) == 0
    assert "m 0" in cal.read_text()
    assert "TRIVIAL" in capsys.readouterr().out
    # the degenerate artifact still drives warnings (always 1)
    scores = write(tmp_path / "s.csv", "g\n0.1\n0.9\n")
    out = tmp_path / "dec.csv"
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", out) == 0
    assert [line.split(",")[-1] for line in out.read_text().splitlines()[1:]] == ["1", "1"]


def test_parse_error_exit_code(tmp_path, capsys):
    data = write(tmp_path / "bad.csv", "g,f\n0.2,abc\n")
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", data, "--eps", 0.05, "--f0", 0.0, "--output", cal) == 3
    assert "row 2" in capsys.readouterr().err


def test_parameter_error_exit_code(dataset, tmp_path):
    cal = tmp_path / "cal.txt"
    assert run_cli("calibrate", "--input", dataset, "--eps", 1.5, "--f0", 0.0, "--output", cal) == 4


def test_consistency_error_exit_code(dataset, tmp_path):
    cal = tmp_path / "cal.txt"
    run_cli("calibrate", "--input", dataset, "--eps", 0.05, "--f0", 0.0, "--output", cal)
    text = cal.read_text().splitlines()
    m_line = next(i for i, line in enumerate(text) if line.startswith("m "))
    text[m_line] = "m 12345"
    cal.write_text("\n".join(text) + "\n")
    scores = write(tmp_path / "s.csv", "g\n0.5\n")
    out = tmp_path / "dec.csv"
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", out) == 5


def test_validation_error_exit_code(tmp_path):
    data = write(tmp_path / "d.csv", "g,f\n0.5,1.0\n")
    rep = tmp_path / "e.csv"
    code = run_cli(
        "evaluate", "--input", data, "--eps", 0.05, "--f0", 0.0, "--trials", 3, "--output", rep
    )
    assert code == 6


def test_failed_command_leaves_no_partial_output(tmp_path):
    data = write(tmp_path / "d.csv", "g,f\n0.5,1.0\n")
    rep = tmp_path / "e.csv"
    assert run_cli("evaluate", "--input", data, "--eps", 0.05, "--f0", 0.0, "--output", rep) != 0
    assert not rep.exists()


def test_seed_env_fallback_and_flag_priority(dataset, tmp_path, monkeypatch):
    cal = tmp_path / "cal.txt"
    run_cli("calibrate", "--input", dataset, "--eps", 0.05, "--f0", 0.0, "--output", cal)
    scores = write(tmp_path / "s.csv", "g\n" + "\n".join(["0.5"] * 20) + "\n")

    out_flag = tmp_path / "flag.csv"
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_flag, "--seed", 42)

    out_env = tmp_path / "env.csv"
    monkeypatch.setenv("CONFORMAL_GUARD_SEED", "42")
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_env)
    assert out_env.read_bytes() == out_flag.read_bytes()

    out_win = tmp_path / "win.csv"
    monkeypatch.setenv("CONFORMAL_GUARD_SEED", "43")
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_win, "--seed", 42)
    assert out_win.read_bytes() == out_flag.read_bytes()

    monkeypatch.setenv("CONFORMAL_GUARD_SEED", "not-a-number")
    assert run_cli("warn", "--calibration", cal, "--input", scores, "--output", tmp_path / "x.csv") == 4


def test_deterministic_u_pins_the_draw_column(tmp_path):
    data = write(tmp_path / "d.csv", "g,f\n" + "\n".join("0.5,-1.0" for _ in range(30)) + "\n")
    cal = tmp_path / "cal.txt"
    run_cli("calibrate", "--input", data, "--eps", 0.2, "--f0", 0.0, "--output", cal)
    scores = write(tmp_path / "s.csv", "g\n" + "\n".join(["0.5"] * 10) + "\n")

    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_a, "--deterministic-u", "--seed", 1)
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_b, "--deterministic-u", "--seed", 99)
    assert out_a.read_bytes() == out_b.read_bytes()
    assert all(line.split(",")[2] == "0" for line in out_a.read_text().splitlines()[1:])

    out_r = tmp_path / "r.csv"
    run_cli("warn", "--calibration", cal, "--input", scores, "--output", out_r, "--seed", 1)
    assert any(line.split(",")[2] != "0" for line in out_r.read_text().splitlines()[1:])


def test_generate_grasp_defaults(tmp_path):
    out = tmp_path / "g.csv"
    assert run_cli("generate", "--mode", "grasp", "--n", 200, "--seed", 3, "--output", out) == 0
    samples = ingest_csv(out)
    assert {s.true_safety for s in samples} <= {0.0, 1.0}


def test_generate_scenes_round_trip(tmp_path):
    out = tmp_path / "scenes.csv"
    assert (
        run_cli(
            "generate", "--mode", "driving", "--n", 60, "--scene-length", 5,
            "--f0", 0.0, "--seed", 4, "--output", out,
        )
        == 0
    )
    samples = ingest_csv(out)
    assert len(samples) == 60
    assert len({s.scene_id for s in samples}) == 12


def test_generate_with_noise_weight(tmp_path):
    out = tmp_path / "noisy.csv"
    assert (
        run_cli(
            "generate", "--mode", "grasp", "--n", 100, "--correlation", 1.0,
            "--noise-weight", 1.0, "--seed", 5, "--output", out,
        )
        == 0
    )
    samples = ingest_csv(out)
    # pure noise: the surrogate no longer equals the binary label
    assert any(s.surrogate_score not in (0.0, 1.0) for s in samples)


def test_compare_pac_output(tmp_path, capsys):
    out = tmp_path / "pac.csv"
    assert run_cli("compare-pac", "--eps", 0.05, "--delta", 0.05, "--output", out) == 0
    printed = capsys.readouterr().out
    assert "conformal: 20 (min) / 29 (practical), pac: 600" in printed
    assert out.read_text().splitlines()[1] == "0.05,0.05,20,29,600,30.0"


def test_evaluate_aggregate_matches_library_harness(dataset, tmp_path):
    rep_path = tmp_path / "eval.csv"
    assert (
        run_cli(
            "evaluate", "--input", dataset, "--eps", 0.05, "--f0", 0.0,
            "--trials", 25, "--seed", 31, "--output", rep_path,
        )
        == 0
    )
    from conformal_guard import run_trials

    report = run_trials(
        ingest_csv(dataset), n_trials=25, split_fraction=0.5, eps_target=0.05, f0=0.0, seed=31
    )
    aggregate = rep_path.read_text().splitlines()[-1].split(",")
    assert float(aggregate[1]) == report.fnr_mean
    assert float(aggregate[2]) == report.fpr_mean
    assert report.fnr_mean <= 0.05 + 3 * np.std([t.fnr for t in report.trials]) / np.sqrt(25)


def test_missing_input_file_exits_one(tmp_path):
    code = run_cli(
        "calibrate", "--input", tmp_path / "nope.csv", "--eps", 0.05, "--f0", 0.0,
        "--output", tmp_path / "cal.txt",
    )
    assert code == 1


def test_module_entry_point_runs(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "conformal_guard", "generate", "--n", "50", "--seed", "0",
         "--output", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
