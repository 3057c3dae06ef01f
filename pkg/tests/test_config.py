"""Config parsing: strict validation, aggregated errors, stable hashing."""

import numpy as np
import pytest

from mbqc_lab.config import (ConfigError, ExperimentConfig, default_n,
                             parse_config, validate_config)


GOOD = """
# comment line
experiment = exp3
seed = 42
n = 9
alpha = 1.0471975512
shots = 5000
trials = 100
m_list = 1,2,3
fast = true
"""


def test_parse_good_config():
    cfg = parse_config(GOOD)
    assert cfg.experiment == "exp3"
    assert cfg.seed == 42
    assert cfg.n == 9
    assert cfg.alpha == pytest.approx(np.pi / 3)
    assert cfg.m_list == (1, 2, 3)
    assert cfg.fast is True


def test_all_errors_reported_together():
    bad = "experiment = exp99\nshots = many\nwhatever = 3\n"
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    msg = str(err.value)
    assert "exp99" in msg
    assert "shots" in msg
    assert "whatever" in msg
    assert "seed" in msg  # missing mandatory seed also listed


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("experiment = exp1\nseed = 1\nseed = 2\n")
    assert "duplicate" in str(err.value)


def test_unparseable_line_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("experiment = exp1\nseed = 1\nnot a key value\n")
    assert "key=value" in str(err.value)


def test_seed_is_mandatory():
    with pytest.raises(ConfigError) as err:
        parse_config("experiment = exp1\n")
    assert "seed" in str(err.value)


def test_validation_rules():
    cfg = ExperimentConfig("exp1", 1, n=6)
    assert any("odd" in e for e in validate_config(cfg))
    cfg = ExperimentConfig("exp1", 1, noise_p=1.5)
    assert any("noise_p" in e for e in validate_config(cfg))
    cfg = ExperimentConfig("exp1", 1, beta_min=2.0, beta_max=1.0)
    assert any("beta_min" in e for e in validate_config(cfg))
    cfg = ExperimentConfig("exp1", 1, compile_mode="magic")
    assert any("compile_mode" in e for e in validate_config(cfg))


def test_hash_ignores_output_dir_but_not_seed():
    a = ExperimentConfig("exp1", 1, output_dir="x")
    b = ExperimentConfig("exp1", 1, output_dir="y")
    c = ExperimentConfig("exp1", 2, output_dir="x")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_fast_profile_divides_budgets():
    cfg = ExperimentConfig("exp1", 1, shots=10000, trials=240, fast=True)
    assert cfg.effective_shots() == 1000
    assert cfg.effective_trials() == 24
    slow = ExperimentConfig("exp1", 1, shots=10000, trials=240)
    assert slow.effective_shots() == 10000


def test_default_n_per_experiment():
    assert default_n(ExperimentConfig("exp1", 1)) == 5
    assert default_n(ExperimentConfig("exp4", 1)) == 11
    assert default_n(ExperimentConfig("exp4", 1, n=17)) == 17
