import json

import pandas as pd
import pytest
import yaml

from app.cli import main

TINY = {
    "partition": {"L": 6, "M": 4, "alpha": 1.0, "rho": 2, "samples_per_client": 30, "feature_dim": 3},
    "train": {"epochs": 1, "batch_size": 8},
    "selection": {"strategy": "repclust", "K": 2, "G": 3},
    "rounds": 3,
    "seeds": [0, 1],
    "report": {"accuracy_targets": [0.3], "sustain_window": 2, "baseline": "repclust[G=3]"},
    "sweep": {"strategies": ["random", "simclust"], "G": [2], "gamma": [0.0]},
    "bench": {"L": [10], "rho": [2], "M": 4},
    "dp": {"gammas": [0.0, 1.0], "L": 10, "rho": 5, "M": 10, "seeds": [0]},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY))
    return str(path)


def test_run_twice_gives_identical_rounds_csv(config_path, tmp_path):
    assert main(["run", "--config", config_path, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", config_path, "--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "rounds.csv").read_bytes()
    assert first == (tmp_path / "b" / "rounds.csv").read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["strategies"]["repclust[G=3]"]["relative_energy_pct"] == 100.0


def test_dotted_overrides_reach_the_config(config_path, tmp_path):
    out = tmp_path / "out"
    argv = ["run", "--config", config_path, "--out", str(out), "--selection.strategy", "random", "--rounds=2", "--seeds", "[4]"]
    assert main(argv) == 0
    df = pd.read_csv(out / "rounds.csv")
    assert set(df["strategy"]) == {"random"}
    assert set(df["seed"]) == {4}
    assert df["round"].max() == 2


def test_invalid_override_exits_with_code_two(config_path, tmp_path):
    assert main(["run", "--config", config_path, "--out", str(tmp_path), "--selection.K", "99"]) == 2
    assert main(["run", "--config", config_path, "--out", str(tmp_path), "--selection.K"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_sweep_and_report(config_path, tmp_path):
    assert main(["sweep", "--config", config_path, "--out", str(tmp_path / "sweep")]) == 0
    rounds_csv = tmp_path / "sweep" / "rounds.csv"
    assert set(pd.read_csv(rounds_csv)["strategy"]) == {"random", "simclust[G=2]"}

    out = tmp_path / "report"
    argv = ["report", "--config", config_path, "--rounds-csv", str(rounds_csv), "--out", str(out), "--report.baseline", "random"]
    assert main(argv) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["strategies"]["random"]["relative_energy_pct"] == 100.0


def test_report_on_missing_csv_fails_cleanly(config_path, tmp_path):
    assert main(["report", "--config", config_path, "--rounds-csv", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_dp_ari_command(config_path, tmp_path):
    assert main(["dp-ari", "--config", config_path, "--out", str(tmp_path)]) == 0
    df = pd.read_csv(tmp_path / "ari.csv")
    assert list(df.columns) == ["gamma", "seed", "method", "ari"]
    assert len(df) == 4
    assert (tmp_path / "ari_summary.json").exists()


def test_bench_command(config_path, tmp_path):
    assert main(["bench", "--config", config_path, "--out", str(tmp_path), "--bench.L", "[10, 20]"]) == 0
    df = pd.read_csv(tmp_path / "bench.csv")
    assert len(df) == 4
    assert set(df["status"]) == {"ok"}


def test_unknown_command_is_an_argparse_error():
    with pytest.raises(SystemExit):
        main(["explode"])
