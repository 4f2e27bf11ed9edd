import math

import pytest

from app.core.config import load_run_config, read_yaml, settings
from app.core.exceptions import ConfigurationError
from app.utils.helpers import parse_dotted_flags, set_dotted

DEFAULT_CONFIG_PATH = settings.DEFAULT_CONFIG


def test_default_config_is_the_full_protocol():
    cfg = load_run_config(DEFAULT_CONFIG_PATH)
    assert (cfg.partition.L, cfg.selection.K, cfg.rounds) == (100, 10, 500)
    assert cfg.seeds == [0, 1, 2, 3, 4]
    assert cfg.train.learning_rate == 0.01
    assert cfg.train.momentum == 0.5
    assert cfg.train.batch_size == 64
    assert cfg.report.sustain_window == 20


def test_no_file_gives_model_defaults():
    cfg = load_run_config(None)
    assert cfg.selection.strategy == "random"
    assert cfg.energy.comm.phy_rate == 150e6


def test_overrides_apply_after_the_file():
    cfg = load_run_config(DEFAULT_CONFIG_PATH, [("selection.strategy", "simclust"), ("selection.G", 5), ("partition.alpha", "infinity")])
    assert cfg.selection.strategy == "simclust"
    assert cfg.selection.G == 5
    assert math.isinf(cfg.partition.alpha)
    assert cfg.label == "simclust[G=5]"


def test_lambda_key_maps_to_lam():
    cfg = load_run_config(None, [("selection.lambda", 0.5)])
    assert cfg.selection.lam == 0.5


@pytest.mark.parametrize(
    "overrides",
    [
        [("selection.K", 200)],
        [("selection.strategy", "repclust"), ("selection.G", 60)],
        [("selection.strategy", "simclust"), ("selection.G", None)],
        [("selection.strategy", "powerd"), ("selection.d", 5)],
        [("report.accuracy_targets", [1.5])],
        [("seeds", [])],
        [("rounds", 0)],
        [("unknown", 1)],
    ],
)
def test_invalid_configs_raise(overrides):
    with pytest.raises(ConfigurationError):
        load_run_config(DEFAULT_CONFIG_PATH, overrides)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigurationError):
        read_yaml(tmp_path / "missing.yaml")
    bad = tmp_path / "list.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        read_yaml(bad)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert read_yaml(empty) == {}


def test_parse_dotted_flags():
    flags = parse_dotted_flags(["--selection.K", "4", "--partition.alpha=infinity", "--sweep.G", "[2, 5]", "--train.hidden=[]"])
    assert flags == [("selection.K", 4), ("partition.alpha", "infinity"), ("sweep.G", [2, 5]), ("train.hidden", [])]


@pytest.mark.parametrize("argv", [["selection.K", "4"], ["--selection.K"]])
def test_parse_dotted_flags_errors(argv):
    with pytest.raises(ConfigurationError):
        parse_dotted_flags(argv)


def test_set_dotted():
    target = {"a": {"b": 1}}
    set_dotted(target, "a.c.d", 2)
    assert target == {"a": {"b": 1, "c": {"d": 2}}}
    with pytest.raises(ConfigurationError):
        set_dotted(target, "a.b.x", 3)
