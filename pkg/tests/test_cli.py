import json
import os
import subprocess
import sys

import numpy as np
import pytest

from surrogate_mc.cli import main, replay
from surrogate_mc.diagnostics import sv_generate
from surrogate_mc.ingest import read_series


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SMC_SEED", raising=False)
    return tmp_path


@pytest.fixture
def prices(workdir):
    r = sv_generate(400, 21)
    p = 100 * np.exp(np.concatenate([[0.0], np.cumsum(r)]))
    lines = ["Date,Open,Close"] + [f"d{k:05d},1.0,{v!r}" for k, v in enumerate(p.tolist())]
    (workdir / "prices.csv").write_text("\n".join(lines) + "\n")
    return workdir / "prices.csv"


def test_toy_reruns_are_byte_identical(workdir):
    for out in ("a.txt", "b.txt"):
        assert main(["toy", "ar1", "--p", "0.6", "--n", "100", "--seed", "1", "--out", out]) == 0
    assert (workdir / "a.txt").read_bytes() == (workdir / "b.txt").read_bytes()
    assert read_series("a.txt").size == 100
    manifest = json.loads((workdir / "a.txt.manifest.json").read_text())
    assert manifest["argv"][-1] == "a.txt"


def test_toy_to_stdout(workdir, capsys):
    assert main(["toy", "sine", "--T", "4", "--n", "4"]) == 0
    assert [float(v) for v in capsys.readouterr().out.split()] == pytest.approx([0, 1, 0, -1], abs=1e-15)


def test_seed_from_environment(workdir, monkeypatch, capsys):
    monkeypatch.setenv("SMC_SEED", "5")
    main(["toy", "ar1", "--n", "5"])
    env = capsys.readouterr().out
    main(["toy", "ar1", "--n", "5", "--seed", "5"])
    assert capsys.readouterr().out == env


def test_missing_input_is_a_usage_error():
    proc = subprocess.run([sys.executable, "-m", "surrogate_mc.cli", "surrogate", "--out-dir", "x"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage:" in proc.stderr and "--input" in proc.stderr


def test_unknown_flag_and_bad_file(workdir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["toy", "ar1", "--bogus"])
    assert exc.value.code == 1
    assert main(["fit", "--input", "missing.csv"]) == 1
    assert "error" in capsys.readouterr().err


def test_fit_sample_surrogate_diagnose(workdir, prices):
    before = prices.read_bytes()
    assert main(["fit", "--input", str(prices), "--price-col", "Close", "--out", "dist.txt"]) == 0
    table = np.loadtxt("dist.txt")
    assert table.shape == (400, 2)
    assert main(["sample", "--dist", "dist.txt", "--n", "50", "--seed", "3", "--out", "draw.txt"]) == 0
    draw = read_series("draw.txt")
    assert draw.size == 50 and table[0, 0] <= draw.min() and draw.max() <= table[-1, 0]

    code = main(["surrogate", "--input", str(prices), "--L", "3", "--K", "5", "--n-real", "2",
                 "--seed", "7", "--out-dir", "run", "-q"])
    assert code == 0
    manifest = json.loads((workdir / "run" / "manifest.json").read_text())
    assert [r["terminated_by"] for r in manifest["realizations"]] == ["goal", "goal"]
    assert manifest["feature_spec"]["terms"][0]["max_lag"] == 3
    target = read_series("run/target.txt")
    for k in range(2):
        z = read_series(f"run/realization_{k}.txt")
        assert z.size == target.size
        assert target.min() <= z.min() and z.max() <= target.max()
        assert (workdir / "run" / f"trajectory_{k}.tsv").exists()

    assert main(["diagnose", "--target", "run/target.txt", "--surrogate", "run/realization_0.txt",
                 "--L", "3", "--K", "5", "--out-dir", "diag"]) == 0
    for name in ("acf_abs.tsv", "acf_lev.tsv", "acf_ret.tsv", "cdf_fold.tsv", "phase.tsv",
                 "manifest.json"):
        assert (workdir / "diag" / name).exists()
    acf = np.loadtxt("diag/acf_ret.tsv")
    assert acf.shape == (3, 5)
    assert np.all(np.abs(acf[:, 2] - acf[:, 1]) <= (acf[:, 4] - acf[:, 3]) / 2 + 1e-12)
    assert prices.read_bytes() == before


def test_max_iterations_exit_code(workdir, prices):
    code = main(["surrogate", "--input", str(prices), "--L", "3", "--K", "5", "--seed", "1",
                 "--max-iterations", "10", "--out-dir", "short", "-q"])
    assert code == 2


def test_frozen_exit_code(workdir, prices):
    code = main(["surrogate", "--input", str(prices), "--L", "3", "--K", "5", "--seed", "1",
                 "--initial-temp", "0", "--goal", "0", "--max-success", "1", "--max-total", "1",
                 "--out-dir", "frozen", "-q"])
    assert code == 3


def test_paper_literal_and_spec_file(workdir, prices):
    spec = {"terms": [{"f": "centered", "g": "centered", "max_lag": 2, "weight": 1.0}],
            "mode": "per-lag-l1", "circular": False}
    (workdir / "spec.json").write_text(json.dumps(spec))
    assert main(["surrogate", "--input", str(prices), "--spec", "spec.json", "--paper-literal",
                 "--out-dir", "lit", "-q"]) == 0
    m = json.loads((workdir / "lit" / "manifest.json").read_text())
    assert m["feature_spec"]["mode"] == "paper-literal"


def test_progress_goes_to_stderr(workdir, prices, capsys):
    main(["surrogate", "--input", str(prices), "--L", "3", "--K", "5", "--log-every", "50",
          "--out-dir", "p"])
    cap = capsys.readouterr()
    assert cap.out == ""
    assert "iteration 50 " in cap.err


def test_manifest_replay_is_byte_identical(workdir, prices):
    assert main(["surrogate", "--input", str(prices), "--L", "3", "--K", "5", "--seed", "4",
                 "--out-dir", "r", "-q"]) == 0
    first = {p.name: p.read_bytes() for p in (workdir / "r").iterdir()}
    os.rename("r", "r_first")
    assert replay("r_first/manifest.json") == 0
    second = {p.name: p.read_bytes() for p in (workdir / "r").iterdir()}
    assert first == second

    main(["toy", "sv", "--n", "300", "--seed", "2", "--out", "sv.txt"])
    data = (workdir / "sv.txt").read_bytes()
    os.remove("sv.txt")
    replay("sv.txt.manifest.json")
    assert (workdir / "sv.txt").read_bytes() == data


def test_console_script_runs(workdir):
    proc = subprocess.run(["smc", "toy", "sine", "--T", "4", "--n", "8"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and len(proc.stdout.split()) == 8
